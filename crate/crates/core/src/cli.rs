//! Command-line front end.
//!
//! `inpoly <solve|penner|degree|oracle|render> [flags]`. Exit codes: 0 on
//! success, 2 on invalid input, 3 when no solution was found, 1 otherwise.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{build_curve, Curve, CurveSpec};
use crate::degree::{estimate_degree, DegreeError};
use crate::geom::Point;
use crate::oracle::{grid_search, GridSolution, OracleError};
use crate::penner::{solve_cyclic, EdgeLengths, DEFAULT_TOL};
use crate::solver::{continuation_solve, multistart_solve, SolveResult, SolveStats, Solution, SolverError, SolverOptions};

pub const SEED_ENV: &str = "INPOLY_SEED";
pub const DEFAULT_GRID: usize = 512;
const SIMPLICITY_SAMPLES: usize = 1024;
const RENDER_SAMPLES: usize = 1024;
const SVG_WIDTH: f64 = 800.0;
const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    NoSolution(String),
    #[error("no solutions to render")]
    MissingSolutions,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::NoSolution(_) | CliError::MissingSolutions => 3,
            CliError::Io { .. } | CliError::Failed(_) => 1,
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidOptions(_) | SolverError::Curve(_) | SolverError::Lengths(_) => {
                CliError::Invalid(e.to_string())
            }
            other => CliError::Failed(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Penner,
    Degree,
    Oracle,
    Render,
}

#[derive(Debug, Parser)]
#[command(name = "inpoly", version, about = "Polygons with prescribed edge lengths inscribed in closed curves")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Job file (JSON); flags override its fields.
    #[arg(long)]
    pub job: Option<PathBuf>,
    /// Curve spec (JSON). Defaults to the unit circle.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Comma-separated lengths, or a file holding a JSON array.
    #[arg(long, allow_hyphen_values = true)]
    pub lengths: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Solutions file to render.
    #[arg(long)]
    pub solutions: Option<PathBuf>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Falls back to $INPOLY_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<f64>,
    #[arg(long, value_name = "X,Y", allow_hyphen_values = true)]
    pub star_center: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub starts: Option<usize>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub phase: Option<f64>,
    pub star_center: Option<Point>,
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub solutions: Option<PathBuf>,
}

fn unit_circle() -> CurveSpec {
    CurveSpec::circle(1.0)
}

/// A fully parsed and validated job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: Command,
    #[serde(default = "unit_circle")]
    pub curve: CurveSpec,
    #[serde(default)]
    pub lengths: Option<EdgeLengths>,
    #[serde(default)]
    pub options: Overrides,
    #[serde(default)]
    pub outputs: Outputs,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn write(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn emit(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write(p, content),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("invalid {what}: {e}")))
}

/// Inline `1,2,3` or a path to a JSON array.
pub fn parse_lengths(arg: &str) -> Result<EdgeLengths, CliError> {
    let inline: Result<Vec<f64>, _> = arg.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let values = match inline {
        Ok(v) => v,
        Err(_) => {
            let path = Path::new(arg);
            if !path.is_file() {
                return Err(CliError::Invalid(format!("lengths '{arg}' are neither a number list nor a file")));
            }
            parse_json::<Vec<f64>>(&read(path)?, "lengths file")?
        }
    };
    EdgeLengths::new(values).map_err(|e| CliError::Invalid(e.to_string()))
}

fn parse_point(arg: &str) -> Result<Point, CliError> {
    let parts: Vec<&str> = arg.split(',').collect();
    let bad = || CliError::Invalid(format!("star center '{arg}' is not of the form X,Y"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let x = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
    let y = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
    Ok(Point::new(x, y))
}

impl JobSpec {
    pub fn from_args(args: Args) -> Result<Self, CliError> {
        let mut job = match &args.job {
            Some(p) => parse_json::<JobSpec>(&read(p)?, "job file")?,
            None => JobSpec {
                command: args.command,
                curve: unit_circle(),
                lengths: None,
                options: Overrides::default(),
                outputs: Outputs::default(),
            },
        };
        job.command = args.command;
        if let Some(p) = &args.curve {
            job.curve = parse_json(&read(p)?, "curve spec")?;
        }
        if let Some(l) = &args.lengths {
            job.lengths = Some(parse_lengths(l)?);
        }
        let o = &mut job.options;
        o.starts = args.starts.or(o.starts);
        o.tol = args.tol.or(o.tol);
        o.threads = args.threads.or(o.threads);
        o.grid = args.grid.or(o.grid);
        o.phase = args.phase.or(o.phase);
        if let Some(c) = &args.star_center {
            o.star_center = Some(parse_point(c)?);
        }
        o.seed = match args.seed.or(o.seed) {
            Some(s) => Some(s),
            None => match std::env::var(SEED_ENV) {
                Ok(v) => Some(v.trim().parse().map_err(|_| CliError::Invalid(format!("{SEED_ENV}='{v}' is not an integer")))?),
                Err(_) => None,
            },
        };
        let out = &mut job.outputs;
        out.out = args.out.or(out.out.take());
        out.svg = args.svg.or(out.svg.take());
        out.csv = args.csv.or(out.csv.take());
        out.solutions = args.solutions.or(out.solutions.take());
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.lengths.is_none() && !(self.command == Command::Render && self.outputs.solutions.is_some()) {
            return Err(CliError::Invalid("missing --lengths".into()));
        }
        if let Some(a) = &self.lengths {
            self.solver_options()?.validate(a.len())?;
        }
        if let Some(t) = self.options.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Invalid(format!("tolerance {t} must be positive")));
            }
        }
        if let Some(p) = self.options.phase {
            if !p.is_finite() {
                return Err(CliError::Invalid("phase must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn curve_spec(&self) -> CurveSpec {
        match self.options.phase {
            Some(p) => self.curve.clone().with_phase(p),
            None => self.curve.clone(),
        }
    }

    pub fn solver_options(&self) -> Result<SolverOptions, CliError> {
        let o = &self.options;
        let mut opts = SolverOptions {
            multistart_count: o.starts,
            seed: o.seed.unwrap_or(0),
            star_center: o.star_center,
            ..Default::default()
        };
        if let Some(t) = o.tol {
            opts.newton_tol = t;
        }
        Ok(opts)
    }

    fn lengths(&self) -> Result<&EdgeLengths, CliError> {
        self.lengths.as_ref().ok_or_else(|| CliError::Invalid("missing --lengths".into()))
    }

    /// The target curve, built and checked for self-intersection.
    fn checked_curve(&self) -> Result<Curve, CliError> {
        let curve = build_curve(&self.curve_spec()).map_err(|e| CliError::Invalid(format!("curve failed simplicity check: {e}")))?;
        if !curve.check_simple(SIMPLICITY_SAMPLES) {
            return Err(CliError::Invalid("curve failed simplicity check".into()));
        }
        Ok(curve)
    }
}

/// One solution as written to the solutions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionRecord {
    pub theta: Vec<f64>,
    pub mu: f64,
    pub sigma: Vec<f64>,
    pub vertices: Vec<Point>,
    pub residual: f64,
    pub convex: bool,
    pub simple: bool,
    pub sgn_det: i8,
    pub provenance: String,
}

impl From<&Solution> for SolutionRecord {
    fn from(s: &Solution) -> Self {
        Self {
            theta: s.config.theta().to_vec(),
            mu: s.config.mu(),
            sigma: s.polygon.sigma.clone(),
            vertices: s.polygon.on_curve.clone(),
            residual: s.residual,
            convex: s.convex,
            simple: s.simple,
            sgn_det: s.sgn_det,
            provenance: s.provenance.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionsFile {
    pub curve: CurveSpec,
    pub lengths: EdgeLengths,
    pub solutions: Vec<SolutionRecord>,
    pub stats: SolveStats,
}

impl SolutionsFile {
    pub fn new(curve: CurveSpec, lengths: EdgeLengths, result: &SolveResult) -> Self {
        Self { curve, lengths, solutions: result.solutions.iter().map(SolutionRecord::from).collect(), stats: result.stats }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: SolutionsFile = parse_json(text, "solutions file")?;
        file.validate()?;
        Ok(file)
    }

    /// Shape checks beyond the schema.
    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.lengths.len();
        for (k, s) in self.solutions.iter().enumerate() {
            let bad = |m: &str| Err(CliError::Invalid(format!("solution {k}: {m}")));
            if s.theta.len() != n || s.vertices.len() != n || s.sigma.len() != n + 1 {
                return bad("wrong number of entries");
            }
            if !s.sigma.windows(2).all(|w| w[0] < w[1]) {
                return bad("sigma is not strictly increasing");
            }
            if !(s.mu > 0.0 && s.mu.is_finite()) {
                return bad("mu must be positive");
            }
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

fn solve(job: &JobSpec) -> Result<SolutionsFile, CliError> {
    let a = job.lengths()?;
    job.checked_curve()?;
    let spec = job.curve_spec();
    let opts = job.solver_options()?;
    let result = match continuation_solve(&spec, a, &opts) {
        Ok(r) if !r.solutions.is_empty() => r,
        Ok(_) | Err(SolverError::PathFailure { .. }) => multistart_solve(&spec, a, &opts)?,
        Err(e) => match CliError::from(e) {
            CliError::Failed(_) => multistart_solve(&spec, a, &opts)?,
            other => return Err(other),
        },
    };
    Ok(SolutionsFile::new(spec, a.clone(), &result))
}

pub fn summary_csv(file: &SolutionsFile) -> Result<String, CliError> {
    let n = file.lengths.len();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["solution", "mu", "residual", "convex", "simple", "sgn_det", "provenance"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=n).map(|i| format!("theta_{i}")));
    header.extend((1..n).map(|i| format!("sigma_{i}")));
    let fail = |e: csv::Error| CliError::Failed(format!("csv: {e}"));
    w.write_record(&header).map_err(fail)?;
    for (k, s) in file.solutions.iter().enumerate() {
        let mut row = vec![
            k.to_string(),
            s.mu.to_string(),
            s.residual.to_string(),
            s.convex.to_string(),
            s.simple.to_string(),
            s.sgn_det.to_string(),
            s.provenance.clone(),
        ];
        row.extend(s.theta.iter().map(f64::to_string));
        row.extend(s.sigma[1..n].iter().map(f64::to_string));
        w.write_record(&row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Failed(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn svg_path(points: &[Point]) -> String {
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let _ = write!(d, "{}{:.6} {:.6} ", if i == 0 { "M" } else { "L" }, p.x, -p.y);
    }
    d.push('Z');
    d
}

/// The curve with every solution polygon overlaid. `y` is flipped so the
/// picture has the usual orientation.
pub fn render_svg(file: &SolutionsFile) -> Result<String, CliError> {
    if file.solutions.is_empty() {
        return Err(CliError::MissingSolutions);
    }
    let curve = build_curve(&file.curve).map_err(|e| CliError::Invalid(e.to_string()))?;
    let samples = curve.sample(RENDER_SAMPLES);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &samples {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let (w, h) = (x1 - x0, y1 - y0);
    let (mx, my) = (0.05 * w, 0.05 * h);
    let (vw, vh) = (w + 2.0 * mx, h + 2.0 * my);
    let scale = vw.max(vh);
    let stroke = 0.004 * scale;
    let font = 0.03 * scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}" width="{:.0}" height="{:.0}">"#,
        x0 - mx,
        -(y1 + my),
        vw,
        vh,
        SVG_WIDTH,
        SVG_WIDTH * vh / vw
    );
    let _ = writeln!(
        s,
        r#"<path class="curve" d="{}" fill="none" stroke="black" stroke-width="{stroke:.6}"/>"#,
        svg_path(&samples)
    );
    for (k, sol) in file.solutions.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(s, r#"<g class="solution" id="solution-{k}">"#);
        let _ = writeln!(
            s,
            r#"<path class="polygon" d="{}" fill="none" stroke="{color}" stroke-width="{stroke:.6}"/>"#,
            svg_path(&sol.vertices)
        );
        for (i, v) in sol.vertices.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<circle class="vertex" cx="{:.6}" cy="{:.6}" r="{:.6}" fill="{color}"/>"#,
                v.x,
                -v.y,
                1.5 * stroke
            );
            let _ = writeln!(
                s,
                r#"<text class="label" x="{:.6}" y="{:.6}" font-size="{font:.6}" fill="{color}">A′<tspan baseline-shift="sub">{i}</tspan></text>"#,
                v.x + stroke,
                -v.y - stroke
            );
        }
        s.push_str("</g>\n");
    }
    let b = curve.basepoint();
    let _ = writeln!(
        s,
        r#"<circle class="basepoint" cx="{:.6}" cy="{:.6}" r="{:.6}" fill="none" stroke="black" stroke-width="{stroke:.6}"/>"#,
        b.x,
        -b.y,
        3.0 * stroke
    );
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn cmd_solve(job: &JobSpec) -> Result<(), CliError> {
    let file = solve(job)?;
    emit(job.outputs.out.as_deref(), &to_json(&file))?;
    if let Some(p) = &job.outputs.csv {
        write(p, &summary_csv(&file)?)?;
    }
    if file.solutions.is_empty() {
        return Err(CliError::NoSolution(format!(
            "no solution found from {} starts ({} failed, {} hit the boundary)",
            file.stats.starts, file.stats.failures, file.stats.boundary_rejections
        )));
    }
    if let Some(p) = &job.outputs.svg {
        write(p, &render_svg(&file)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PennerOutput<'a> {
    lengths: &'a EdgeLengths,
    #[serde(rename = "R")]
    radius: f64,
    branch: crate::penner::Branch,
    central_angles: &'a [f64],
    vertices: &'a [Point],
}

pub fn cmd_penner(job: &JobSpec) -> Result<(), CliError> {
    let a = job.lengths()?;
    let tol = job.options.tol.unwrap_or(DEFAULT_TOL);
    let poly = solve_cyclic(a, tol).map_err(|e| CliError::Failed(e.to_string()))?;
    let out = PennerOutput {
        lengths: a,
        radius: poly.radius,
        branch: poly.branch,
        central_angles: &poly.central_angles,
        vertices: &poly.vertices,
    };
    emit(job.outputs.out.as_deref(), &to_json(&out))
}

#[derive(Serialize)]
struct DegreeOutput {
    curve: CurveSpec,
    lengths: EdgeLengths,
    degree: i64,
    doubled_degree: i64,
    stable: bool,
    regular: bool,
    min_abs_det: Option<f64>,
    starts: usize,
    solutions: Vec<SolutionRecord>,
}

pub fn cmd_degree(job: &JobSpec) -> Result<(), CliError> {
    let a = job.lengths()?;
    job.checked_curve()?;
    let spec = job.curve_spec();
    let report = estimate_degree(&spec, a, &job.solver_options()?).map_err(|e| match e {
        DegreeError::DimensionTooHigh(_) => CliError::Invalid(e.to_string()),
        DegreeError::Solver(s) => s.into(),
    })?;
    if !report.regular {
        eprintln!("warning: tiny Jacobian determinant; the target may not be a regular value, perturb the lengths");
    }
    let out = DegreeOutput {
        curve: spec,
        lengths: a.clone(),
        degree: report.degree,
        doubled_degree: report.doubled_degree,
        stable: report.stable,
        regular: report.regular,
        min_abs_det: report.min_abs_det,
        starts: report.starts,
        solutions: report.solutions.iter().map(SolutionRecord::from).collect(),
    };
    emit(job.outputs.out.as_deref(), &to_json(&out))
}

#[derive(Serialize)]
struct OracleOutput {
    curve: CurveSpec,
    lengths: EdgeLengths,
    grid: usize,
    candidates: Vec<GridSolution>,
}

pub fn cmd_oracle(job: &JobSpec) -> Result<(), CliError> {
    let a = job.lengths()?;
    let curve = job.checked_curve()?;
    let grid = job.options.grid.unwrap_or(DEFAULT_GRID);
    let candidates = grid_search(&curve, a, grid).map_err(|e| match e {
        OracleError::GridTooCoarse(_) => CliError::NoSolution(e.to_string()),
        _ => CliError::Invalid(e.to_string()),
    })?;
    let out = OracleOutput { curve: job.curve_spec(), lengths: a.clone(), grid, candidates };
    emit(job.outputs.out.as_deref(), &to_json(&out))
}

pub fn cmd_render(job: &JobSpec) -> Result<(), CliError> {
    let file = match &job.outputs.solutions {
        Some(p) => SolutionsFile::parse(&read(p)?)?,
        None => solve(job)?,
    };
    let svg = render_svg(&file)?;
    emit(job.outputs.svg.as_deref().or(job.outputs.out.as_deref()), &svg)
}

pub fn execute(job: &JobSpec) -> Result<(), CliError> {
    let body = || match job.command {
        Command::Solve => cmd_solve(job),
        Command::Penner => cmd_penner(job),
        Command::Degree => cmd_degree(job),
        Command::Oracle => cmd_oracle(job),
        Command::Render => cmd_render(job),
    };
    match job.options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Failed(format!("thread pool: {e}")))?
            .install(body),
        None => body(),
    }
}

/// Parse `args` (program name first), run the job and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match JobSpec::from_args(args).and_then(|job| execute(&job)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
