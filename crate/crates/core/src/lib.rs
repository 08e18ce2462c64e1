//! Polygons with prescribed edge lengths inscribed in Jordan curves.
//!
//! A configuration `(θ₁..θₙ, μ)` with `Σθ = 2π` places vertices at
//! `γ(σᵢ)` on a closed curve `γ`; the solver finds configurations whose scaled
//! chords `μ|γ(σᵢ) − γ(σᵢ₋₁)|` equal a target length vector.

pub mod cli;
pub mod curve;
pub mod degree;
pub mod geom;
pub mod oracle;
pub mod penner;
pub mod solver;
pub mod testmap;
