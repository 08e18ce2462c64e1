use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{newton_solve, Provenance, SolveResult, SolveStats, Solution, SolverError, SolverOptions};
use crate::curve::{build_curve, Curve, CurveSpec};
use crate::penner::EdgeLengths;
use crate::testmap::ConfigPoint;

/// Additive-recurrence generator `frac(s + k·g)` with the generalized golden
/// ratio basis, randomized by a seeded shift.
struct Kronecker {
    basis: Vec<f64>,
    shift: Vec<f64>,
}

impl Kronecker {
    fn new(dim: usize, seed: u64) -> Self {
        // unique positive root of x^(d+1) = x + 1
        let d = dim as f64;
        let mut phi: f64 = 2.0;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (d + 1.0));
        }
        let basis = (1..=dim).map(|j| phi.powi(-(j as i32)).fract()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.gen::<f64>()).collect();
        Self { basis, shift }
    }

    fn point(&self, k: usize) -> Vec<f64> {
        self.basis
            .iter()
            .zip(&self.shift)
            .map(|(g, s)| (s + (k as f64 + 1.0) * g).fract())
            .collect()
    }
}

/// `count` starting configurations: sorted-spacing points of the floored
/// θ-simplex crossed with a log-uniform `μ` in `bounds`.
pub fn simplex_starts(n: usize, count: usize, seed: u64, theta_min: f64, (lo, hi): (f64, f64)) -> Vec<ConfigPoint> {
    let seq = Kronecker::new(n, seed);
    let budget = TAU - n as f64 * theta_min;
    (0..count)
        .map(|k| {
            let u = seq.point(k);
            let mut cuts = u[..n - 1].to_vec();
            cuts.sort_by(f64::total_cmp);
            let mut theta = Vec::with_capacity(n);
            let mut prev = 0.0;
            for &c in cuts.iter().chain(std::iter::once(&1.0)) {
                theta.push(theta_min + (c - prev) * budget);
                prev = c;
            }
            let head: f64 = theta[..n - 1].iter().sum();
            theta[n - 1] = TAU - head;
            let mu = (lo.ln() + u[n - 1] * (hi.ln() - lo.ln())).exp();
            ConfigPoint::new(theta, mu).expect("start lies inside the configuration space")
        })
        .collect()
}

/// Multi-start Newton on an already built curve.
///
/// Starts run in parallel; results are merged in start order so the output is
/// independent of scheduling.
pub fn multistart_on_curve(curve: &Curve, a: &EdgeLengths, opts: &SolverOptions) -> Result<SolveResult, SolverError> {
    let n = a.len();
    opts.validate(n)?;
    let bounds = opts.mu_bounds_for(curve, a);
    let local = SolverOptions { mu_bounds: Some(bounds), ..opts.clone() };
    let starts = simplex_starts(n, opts.start_count(n), opts.seed, opts.theta_min, bounds);

    let outcomes: Vec<_> = starts.par_iter().map(|x0| newton_solve(curve, a, x0, &local)).collect();

    let mut stats = SolveStats { starts: starts.len(), ..Default::default() };
    let mut solutions: Vec<Solution> = Vec::new();
    for (id, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(out) => {
                if out.x.min_theta() <= opts.theta_min {
                    stats.boundary_rejections += 1;
                    continue;
                }
                if solutions.iter().any(|s| s.config.distance(&out.x) < opts.dedupe_radius) {
                    continue;
                }
                let sol = Solution::new(curve, a, out.x, Provenance::Multistart(id))?;
                if sol.residual < opts.newton_tol {
                    solutions.push(sol);
                } else {
                    stats.failures += 1;
                }
            }
            Err(SolverError::BoundaryEscape(_)) => stats.boundary_rejections += 1,
            Err(SolverError::InvalidOptions(m)) => return Err(SolverError::InvalidOptions(m)),
            Err(_) => stats.failures += 1,
        }
    }
    Ok(SolveResult { solutions, stats })
}

pub fn multistart_solve(spec: &CurveSpec, a: &EdgeLengths, opts: &SolverOptions) -> Result<SolveResult, SolverError> {
    let curve = build_curve(spec)?;
    multistart_on_curve(&curve, a, opts)
}
