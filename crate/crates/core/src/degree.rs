//! Topological degree of the test map by signed root counting.
//!
//! At a regular value `a`, `deg = Σ sgn det J(x)` over the preimages `x`.
//! Preimages are enumerated by dense multi-start, so the count is only as
//! complete as the start set; the report carries a stability check against a
//! doubled start set and flags tiny determinants.

use serde::Serialize;
use thiserror::Error;

use crate::curve::CurveSpec;
use crate::penner::EdgeLengths;
use crate::solver::{multistart_solve, Solution, SolverError, SolverOptions};

/// Largest number of sides accepted.
pub const MAX_SIDES: usize = 5;
/// Determinants below this are flagged as possibly non-regular.
pub const REGULARITY_THRESHOLD: f64 = 1e-8;
/// Start multiplier relative to the plain multi-start default.
const START_FACTOR: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DegreeError {
    #[error("degree estimation supports at most {MAX_SIDES} sides, got {0}")]
    DimensionTooHigh(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub lengths: EdgeLengths,
    pub solutions: Vec<Solution>,
    pub degree: i64,
    /// Smallest `|det J|` over the solutions; `None` with no solutions.
    pub min_abs_det: Option<f64>,
    /// `false` when some determinant is below [`REGULARITY_THRESHOLD`];
    /// perturb `a` and retry in that case.
    pub regular: bool,
    pub starts: usize,
    /// Degree from the doubled start set.
    pub doubled_degree: i64,
    pub stable: bool,
}

fn signed_count(solutions: &[Solution]) -> i64 {
    solutions.iter().map(|s| i64::from(s.sgn_det)).sum()
}

pub fn estimate_degree(spec: &CurveSpec, a: &EdgeLengths, opts: &SolverOptions) -> Result<DegreeReport, DegreeError> {
    let n = a.len();
    if n > MAX_SIDES {
        return Err(DegreeError::DimensionTooHigh(n));
    }
    let starts = START_FACTOR * opts.start_count(n);
    let run = |count: usize| {
        let o = SolverOptions { multistart_count: Some(count), ..opts.clone() };
        multistart_solve(spec, a, &o)
    };
    let base = run(starts)?;
    let doubled = run(2 * starts)?;

    let degree = signed_count(&base.solutions);
    let doubled_degree = signed_count(&doubled.solutions);
    let min_abs_det = base.solutions.iter().map(|s| s.det.abs()).reduce(f64::min);
    Ok(DegreeReport {
        lengths: a.clone(),
        degree,
        regular: min_abs_det.is_none_or(|d| d >= REGULARITY_THRESHOLD),
        min_abs_det,
        starts,
        doubled_degree,
        stable: degree == doubled_degree,
        solutions: base.solutions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lengths(v: &[f64]) -> EdgeLengths {
        EdgeLengths::new(v.to_vec()).unwrap()
    }

    fn check_invariants(r: &DegreeReport) {
        let k = r.solutions.len() as i64;
        assert!(r.degree.abs() <= k);
        assert_eq!((r.degree - k).rem_euclid(2), 0);
        if r.degree != 0 {
            assert!(k > 0);
        }
    }

    #[test]
    fn circle_triangle_has_unit_degree() {
        let r = estimate_degree(&CurveSpec::circle(1.0), &lengths(&[1.0; 3]), &SolverOptions::default()).unwrap();
        assert_eq!(r.degree.abs(), 1);
        assert!(r.stable && r.regular);
        assert_eq!(r.starts, 4 * 600);
        check_invariants(&r);
    }

    #[test]
    fn ellipse_matches_circle() {
        let opts = SolverOptions::default();
        let a = lengths(&[1.0; 3]);
        let c = estimate_degree(&CurveSpec::circle(1.0), &a, &opts).unwrap();
        let e = estimate_degree(&CurveSpec::ellipse(2.0, 1.0), &a, &opts).unwrap();
        assert_eq!(e.degree, c.degree);
        assert!(e.stable);
        check_invariants(&e);
    }

    #[test]
    fn degree_is_locally_constant_in_lengths() {
        let opts = SolverOptions { multistart_count: Some(300), ..Default::default() };
        let spec = CurveSpec::ellipse(2.0, 1.0);
        let d0 = estimate_degree(&spec, &lengths(&[1.2, 0.9, 1.05]), &opts).unwrap();
        for delta in [[1e-3, 0.0, 0.0], [0.0, -1e-3, 0.0], [-7e-4, 5e-4, 6e-4]] {
            let a: Vec<f64> = [1.2, 0.9, 1.05].iter().zip(delta).map(|(x, d)| x + d).collect();
            let d1 = estimate_degree(&spec, &lengths(&a), &opts).unwrap();
            assert_eq!(d1.degree, d0.degree);
            check_invariants(&d1);
        }
    }

    #[test]
    fn six_sides_rejected() {
        let err = estimate_degree(&CurveSpec::circle(1.0), &lengths(&[1.0; 6]), &SolverOptions::default()).unwrap_err();
        assert_eq!(err, DegreeError::DimensionTooHigh(6));
    }
}
