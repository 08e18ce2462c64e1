//! Root finding for `Sl_γ(x) = a`.
//!
//! Three layers: a projected, Armijo-damped Newton corrector
//! ([`newton_solve`]); continuation from the circle base case along a radial
//! homotopy ([`continuation_solve`]); and multi-start enumeration with
//! deduplication ([`multistart_solve`]).

mod homotopy;
mod multistart;
mod newton;

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::curve::{Curve, CurveError};
use crate::geom::Point;
use crate::penner::{EdgeLengths, LengthError, PennerError};
use crate::testmap::{jacobian, residual, ConfigPoint, InscribedPolygon, TestMapError};

pub use homotopy::{continuation_solve, homotopy_family, penner_seed, HomotopyFamily};
pub use multistart::{multistart_on_curve, multistart_solve, simplex_starts};
pub use newton::{newton_solve, project_config, NewtonOutcome};

/// Samples used when estimating the curve diameter for the μ guards.
const BOUNDS_DIAMETER_SAMPLES: usize = 512;

/// Which side of the admissible region an iterate got stuck on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    /// Some `θᵢ` pinned at the floor.
    ThetaFloor { index: usize },
    /// `μ` pinned at its lower guard.
    MuLower,
    /// `μ` pinned at its upper guard.
    MuUpper,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("iterate escaped to the boundary ({0:?})")]
    BoundaryEscape(BoundaryKind),
    #[error("line search failed (residual {residual:e})")]
    LineSearchFailed { residual: f64 },
    #[error("continuation stalled at t = {last_t}")]
    PathFailure { last_t: f64 },
    #[error("curve is not star-shaped about ({}, {}) near α = {alpha}", center.x, center.y)]
    NotStarShaped { center: Point, alpha: f64 },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Lengths(#[from] LengthError),
    #[error(transparent)]
    Penner(#[from] PennerError),
    #[error(transparent)]
    TestMap(#[from] TestMapError),
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Target for `‖residual‖∞`.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Backtracking factor of the Armijo line search.
    pub armijo_factor: f64,
    /// Smallest line-search step before giving up.
    pub min_step: f64,
    /// Floor for every `θᵢ`.
    pub theta_min: f64,
    /// Guards for `μ`; derived from the lengths and curve diameter when `None`.
    pub mu_bounds: Option<(f64, f64)>,
    /// Initial number of continuation steps from `t = 0` to `t = 1`.
    pub homotopy_steps: usize,
    pub min_homotopy_step: f64,
    /// Defaults to `200·n`.
    pub multistart_count: Option<usize>,
    /// Radius in `(θ, log μ)` below which two solutions are the same.
    pub dedupe_radius: f64,
    pub seed: u64,
    /// Star center for the homotopy; centroid of 1024 samples when `None`.
    pub star_center: Option<Point>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton_iters: 100,
            armijo_factor: 0.5,
            min_step: 2f64.powi(-30),
            theta_min: 1e-6,
            mu_bounds: None,
            homotopy_steps: 64,
            min_homotopy_step: 2f64.powi(-10),
            multistart_count: None,
            dedupe_radius: 1e-6,
            seed: 0,
            star_center: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self, n: usize) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidOptions(m.to_string()));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.newton_tol) || !pos(self.min_step) || !pos(self.dedupe_radius) || !pos(self.min_homotopy_step) {
            return bad("tolerances must be positive");
        }
        if !(self.armijo_factor > 0.0 && self.armijo_factor < 1.0) {
            return bad("armijo factor must lie in (0, 1)");
        }
        if !pos(self.theta_min) || self.theta_min >= std::f64::consts::PI / n as f64 {
            return bad("theta_min must lie in (0, π/n)");
        }
        if self.max_newton_iters == 0 || self.homotopy_steps == 0 {
            return bad("iteration counts must be positive");
        }
        if let Some((lo, hi)) = self.mu_bounds {
            if !(pos(lo) && pos(hi) && lo < hi) {
                return bad("mu bounds must satisfy 0 < lo < hi");
            }
        }
        if self.multistart_count == Some(0) {
            return bad("multistart count must be positive");
        }
        Ok(())
    }

    pub fn start_count(&self, n: usize) -> usize {
        self.multistart_count.unwrap_or(200 * n)
    }

    /// The μ guards for `curve`: explicit bounds if set, else
    /// `[Σa/(n·diam), n²·Σa/diam]`.
    pub fn mu_bounds_for(&self, curve: &Curve, a: &EdgeLengths) -> (f64, f64) {
        self.mu_bounds.unwrap_or_else(|| derived_mu_bounds(curve, a))
    }
}

/// Any solution has `μ ≥ max(a)/diam ≥ Σa/(n·diam)`; the upper guard uses
/// `diam/n` as the smallest chord scale of interest.
pub fn derived_mu_bounds(curve: &Curve, a: &EdgeLengths) -> (f64, f64) {
    let n = a.len() as f64;
    let diam = curve.diameter(BOUNDS_DIAMETER_SAMPLES);
    let sum = a.sum();
    (sum / (n * diam), n * sum / (diam / n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Homotopy,
    Multistart(usize),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Homotopy => write!(f, "homotopy"),
            Provenance::Multistart(id) => write!(f, "multistart:{id}"),
        }
    }
}

impl Serialize for Provenance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub config: ConfigPoint,
    /// `‖residual‖∞`, re-evaluated at the final point.
    pub residual: f64,
    pub polygon: InscribedPolygon,
    pub convex: bool,
    pub simple: bool,
    pub det: f64,
    pub sgn_det: i8,
    pub provenance: Provenance,
}

impl Solution {
    pub fn new(curve: &Curve, a: &EdgeLengths, config: ConfigPoint, provenance: Provenance) -> Result<Self, SolverError> {
        let residual = residual(curve, &config, a)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let det = jacobian(curve, &config, a)?.determinant();
        let polygon = InscribedPolygon::new(curve, &config);
        Ok(Self {
            residual,
            convex: polygon.convex,
            simple: polygon.simple,
            det,
            sgn_det: if det > 0.0 { 1 } else if det < 0.0 { -1 } else { 0 },
            polygon,
            config,
            provenance,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub starts: usize,
    pub failures: usize,
    pub boundary_rejections: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub solutions: Vec<Solution>,
    pub stats: SolveStats,
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
