use std::f64::consts::TAU;

use nalgebra::DVector;

use super::{inf_norm, BoundaryKind, SolverError, SolverOptions};
use crate::curve::Curve;
use crate::penner::EdgeLengths;
use crate::testmap::{jacobian, residual, ConfigPoint};

/// Consecutive pinned iterates that count as escaping the admissible region.
const PINNED_LIMIT: usize = 5;
/// Extra full Newton steps after reaching the tolerance.
const POLISH_STEPS: usize = 3;
const ARMIJO_C: f64 = 1e-4;
/// Accepted steps shorter than this count as stalling.
const STALL_STEP: f64 = 1e-6;
/// Width of the boundary layer, in units of the `θ` floor.
const THETA_LAYER: f64 = 100.0;
/// Relative width of the boundary layer at the `μ` guards.
const MU_LAYER: f64 = 1.01;

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: ConfigPoint,
    /// `‖residual‖∞` at `x`.
    pub residual: f64,
    pub iterations: usize,
}

/// Euclidean projection onto `{θ : θᵢ ≥ floor, Σθ = 2π}`.
fn project_simplex(theta: &[f64], floor: f64) -> Vec<f64> {
    let n = theta.len();
    let budget = TAU - n as f64 * floor;
    let mut u: Vec<f64> = theta.iter().map(|t| t - floor).collect();
    let mut sorted = u.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (j, &v) in sorted.iter().enumerate() {
        acc += v;
        let cand = (acc - budget) / (j + 1) as f64;
        if v - cand > 0.0 {
            tau = cand;
        }
    }
    for v in u.iter_mut() {
        *v = (*v - tau).max(0.0) + floor;
    }
    // put the rounding residue on the largest entry
    let imax = (0..n).max_by(|&i, &j| u[i].total_cmp(&u[j])).unwrap_or(0);
    let rest: f64 = u.iter().enumerate().filter(|&(i, _)| i != imax).map(|(_, v)| v).sum();
    u[imax] = TAU - rest;
    u
}

/// Map raw coordinates into the admissible region: `θ` onto the floored
/// simplex, `μ` clamped to `[lo, hi]`.
pub fn project_config(theta: &[f64], mu: f64, floor: f64, (lo, hi): (f64, f64)) -> Result<ConfigPoint, SolverError> {
    let theta = if theta.iter().all(|t| t.is_finite()) {
        project_simplex(theta, floor)
    } else {
        vec![TAU / theta.len() as f64; theta.len()]
    };
    let mu = if mu.is_finite() { mu.clamp(lo, hi) } else { lo };
    Ok(ConfigPoint::new(theta, mu)?)
}

fn pinned(x: &ConfigPoint, floor: f64, (lo, hi): (f64, f64)) -> Option<BoundaryKind> {
    let edge = floor * (1.0 + 1e-9);
    if let Some(index) = x.theta().iter().position(|&t| t <= edge) {
        return Some(BoundaryKind::ThetaFloor { index });
    }
    if x.mu() <= lo {
        return Some(BoundaryKind::MuLower);
    }
    if x.mu() >= hi {
        return Some(BoundaryKind::MuUpper);
    }
    None
}

/// Nearest face when `x` sits within the boundary layer.
fn near_boundary(x: &ConfigPoint, floor: f64, (lo, hi): (f64, f64)) -> Option<BoundaryKind> {
    let theta = x.theta();
    let imin = (0..theta.len()).min_by(|&i, &j| theta[i].total_cmp(&theta[j]))?;
    if theta[imin] <= THETA_LAYER * floor {
        return Some(BoundaryKind::ThetaFloor { index: imin });
    }
    if x.mu() <= lo * MU_LAYER {
        return Some(BoundaryKind::MuLower);
    }
    if x.mu() >= hi / MU_LAYER {
        return Some(BoundaryKind::MuUpper);
    }
    None
}

fn chart_to_config(z: &DVector<f64>, floor: f64, bounds: (f64, f64)) -> Result<ConfigPoint, SolverError> {
    let n = z.len();
    let mut theta: Vec<f64> = z.as_slice()[..n - 1].to_vec();
    theta.push(TAU - theta.iter().sum::<f64>());
    project_config(&theta, z[n - 1], floor, bounds)
}

fn sq_norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Newton direction `d` with `J d = -r`, or `None` if `J` is numerically singular.
fn newton_direction(curve: &Curve, x: &ConfigPoint, a: &EdgeLengths, r: &[f64]) -> Result<Option<DVector<f64>>, SolverError> {
    let j = jacobian(curve, x, a)?;
    let hadamard: f64 = j.column_iter().map(|c| c.norm()).product();
    let lu = j.lu();
    if !(lu.determinant().abs() > 1e-14 * hadamard) {
        return Ok(None);
    }
    let rhs = -DVector::from_column_slice(r);
    Ok(lu.solve(&rhs).filter(|d| d.iter().all(|v| v.is_finite())))
}

/// Damped Newton iteration for `residual(curve, x, a) = 0`.
///
/// Iterates stay on the floored simplex with `μ` inside its guards. An
/// iterate that sits on the boundary for five consecutive steps, converges
/// there, or stalls within a thin layer next to it is reported as
/// [`SolverError::BoundaryEscape`].
pub fn newton_solve(
    curve: &Curve,
    a: &EdgeLengths,
    x0: &ConfigPoint,
    opts: &SolverOptions,
) -> Result<NewtonOutcome, SolverError> {
    let n = a.len();
    opts.validate(n)?;
    let bounds = opts.mu_bounds_for(curve, a);
    let floor = opts.theta_min;

    let mut x = project_config(x0.theta(), x0.mu(), floor, bounds)?;
    let mut r = residual(curve, &x, a)?;
    let mut pinned_run = 0;
    let mut stalled_run = 0;

    for iteration in 0..opts.max_newton_iters {
        if inf_norm(&r) < opts.newton_tol {
            if let Some(kind) = pinned(&x, floor, bounds) {
                return Err(SolverError::BoundaryEscape(kind));
            }
            let (x, r) = polish(curve, a, x, r, floor, bounds)?;
            return Ok(NewtonOutcome { residual: inf_norm(&r), x, iterations: iteration });
        }
        let Some(d) = newton_direction(curve, &x, a, &r)? else {
            if let Some(kind) = pinned(&x, floor, bounds) {
                return Err(SolverError::BoundaryEscape(kind));
            }
            return Err(SolverError::SingularJacobian { iteration });
        };

        let z = DVector::from_vec(x.chart());
        let merit = sq_norm(&r);
        let mut step = 1.0;
        let accepted = loop {
            let trial = chart_to_config(&(&z + &d * step), floor, bounds)?;
            let rt = residual(curve, &trial, a)?;
            if sq_norm(&rt) <= (1.0 - 2.0 * ARMIJO_C * step) * merit {
                break Some((trial, rt));
            }
            step *= opts.armijo_factor;
            if step < opts.min_step {
                break None;
            }
        };
        let Some((xn, rn)) = accepted else {
            if let Some(kind) = pinned(&x, floor, bounds) {
                return Err(SolverError::BoundaryEscape(kind));
            }
            return Err(SolverError::LineSearchFailed { residual: inf_norm(&r) });
        };
        x = xn;
        r = rn;

        match pinned(&x, floor, bounds) {
            Some(kind) => {
                pinned_run += 1;
                if pinned_run >= PINNED_LIMIT {
                    return Err(SolverError::BoundaryEscape(kind));
                }
            }
            None => pinned_run = 0,
        }
        stalled_run = if step < STALL_STEP { stalled_run + 1 } else { 0 };
        if stalled_run >= PINNED_LIMIT {
            if let Some(kind) = near_boundary(&x, floor, bounds) {
                return Err(SolverError::BoundaryEscape(kind));
            }
        }
    }
    if inf_norm(&r) < opts.newton_tol && pinned(&x, floor, bounds).is_none() {
        let iterations = opts.max_newton_iters;
        let (x, r) = polish(curve, a, x, r, floor, bounds)?;
        return Ok(NewtonOutcome { residual: inf_norm(&r), x, iterations });
    }
    if let Some(kind) = near_boundary(&x, floor, bounds) {
        return Err(SolverError::BoundaryEscape(kind));
    }
    Err(SolverError::MaxIterations { iterations: opts.max_newton_iters, residual: inf_norm(&r) })
}

/// A few undamped steps past the tolerance, kept only while they help.
fn polish(
    curve: &Curve,
    a: &EdgeLengths,
    mut x: ConfigPoint,
    mut r: Vec<f64>,
    floor: f64,
    bounds: (f64, f64),
) -> Result<(ConfigPoint, Vec<f64>), SolverError> {
    for _ in 0..POLISH_STEPS {
        let Some(d) = newton_direction(curve, &x, a, &r)? else { break };
        let z = DVector::from_vec(x.chart());
        let trial = chart_to_config(&(&z + &d), floor, bounds)?;
        let rt = residual(curve, &trial, a)?;
        if inf_norm(&rt) >= inf_norm(&r) || pinned(&trial, floor, bounds).is_some() {
            break;
        }
        x = trial;
        r = rt;
    }
    Ok((x, r))
}
