fn main() {
    std::process::exit(inpoly::cli::run(std::env::args_os()));
}
