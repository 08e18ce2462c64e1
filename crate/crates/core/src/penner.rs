//! Convex cyclic polygons with prescribed side lengths.
//!
//! For a length vector in `W` (every side shorter than the sum of the others)
//! there is exactly one convex polygon inscribed in a circle with those sides,
//! up to isometry. It is found by a one-dimensional bisection on the
//! circumradius.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point;

pub const DEFAULT_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LengthError {
    #[error("need at least 3 sides, got {0}")]
    TooFewSides(usize),
    #[error("length at index {0} is not a positive finite number")]
    NotPositive(usize),
    #[error("polygon inequality violated at index {0}")]
    PolygonInequalityViolated(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PennerError {
    #[error("bisection did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

/// Side lengths `a₁…aₙ` in the open cone `W`.
///
/// Only constructible through [`EdgeLengths::new`], so holding one is proof
/// of validation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EdgeLengths(Vec<f64>);

impl EdgeLengths {
    pub fn new(a: Vec<f64>) -> Result<Self, LengthError> {
        validate_lengths(&a)?;
        Ok(Self(a))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the longest side, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut m = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[m] {
                m = i;
            }
        }
        m
    }

    pub fn scaled(&self, c: f64) -> Result<Self, LengthError> {
        Self::new(self.0.iter().map(|v| v * c).collect())
    }
}

impl<'de> Deserialize<'de> for EdgeLengths {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        EdgeLengths::new(v).map_err(serde::de::Error::custom)
    }
}

/// Check membership in `W`: `n ≥ 3`, all positive, each below the sum of the rest.
pub fn validate_lengths(a: &[f64]) -> Result<(), LengthError> {
    if a.len() < 3 {
        return Err(LengthError::TooFewSides(a.len()));
    }
    if let Some(i) = a.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(LengthError::NotPositive(i));
    }
    let total: f64 = a.iter().sum();
    // a_i < total - a_i
    if let Some(i) = a.iter().position(|&v| v >= total - v) {
        return Err(LengthError::PolygonInequalityViolated(i));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    CenterInside,
    CenterOnLongestSide,
    CenterOutside,
}

#[derive(Debug, Clone, Serialize)]
pub struct CyclicPolygon {
    pub radius: f64,
    /// Counterclockwise arc subtended by each side; they sum to 2π.
    pub central_angles: Vec<f64>,
    pub branch: Branch,
    /// Vertices on the circle of radius `radius` about the origin, first at angle 0.
    pub vertices: Vec<Point>,
}

fn half_angle(a: f64, r: f64) -> f64 {
    (a / (2.0 * r)).min(1.0).asin()
}

/// `Σ asin(aᵢ/2R) - π`; zero at the center-inside circumradius.
fn inside_equation(a: &[f64], r: f64) -> f64 {
    a.iter().map(|&ai| half_angle(ai, r)).sum::<f64>() - PI
}

/// `Σ_{i≠m} asin(aᵢ/2R) - asin(a_m/2R)`; zero at the center-outside circumradius.
fn outside_equation(a: &[f64], m: usize, r: f64) -> f64 {
    let others: f64 = a
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != m)
        .map(|(_, &ai)| half_angle(ai, r))
        .sum();
    others - half_angle(a[m], r)
}

/// Bisect a sign change of `f` on `[lo, hi]` down to floating-point resolution.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Result<f64, PennerError> {
    let lo_sign = f(lo) > 0.0;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if (f(mid) > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(PennerError::NoConvergence(MAX_BISECTIONS))
}

/// Double `hi` from `lo` until `done(hi)`.
fn bracket(lo: f64, done: impl Fn(f64) -> bool) -> Result<f64, PennerError> {
    let mut hi = 2.0 * lo;
    for _ in 0..MAX_BISECTIONS {
        if done(hi) {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(PennerError::NoConvergence(MAX_BISECTIONS))
}

/// Circumradius and branch for the convex cyclic polygon with sides `a`.
///
/// `tol` decides when the longest side counts as a diameter; away from that
/// boundary the radius is bisected to full floating-point resolution.
pub fn circumradius(a: &EdgeLengths, tol: f64) -> Result<(f64, Branch), PennerError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(PennerError::BadTolerance(tol));
    }
    let a = a.as_slice();
    let m = EdgeLengths(a.to_vec()).argmax();
    let r0 = a[m] / 2.0;
    let s: f64 = a
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != m)
        .map(|(_, &ai)| half_angle(ai, r0))
        .sum();
    if (s - FRAC_PI_2).abs() <= tol {
        Ok((r0, Branch::CenterOnLongestSide))
    } else if s > FRAC_PI_2 {
        let hi = bracket(r0, |r| inside_equation(a, r) < 0.0)?;
        Ok((bisect(r0, hi, |r| inside_equation(a, r))?, Branch::CenterInside))
    } else {
        let hi = bracket(r0, |r| outside_equation(a, m, r) > 0.0)?;
        Ok((bisect(r0, hi, |r| outside_equation(a, m, r))?, Branch::CenterOutside))
    }
}

/// Solve the circle case: the unique convex cyclic polygon with sides `a`.
///
/// The longest side's arc is taken as the complement of all the others, so
/// the vertex loop closes to rounding and the leftover circumradius error is
/// pushed onto the side whose chord is least sensitive to its arc.
pub fn solve_cyclic(a: &EdgeLengths, tol: f64) -> Result<CyclicPolygon, PennerError> {
    let (radius, branch) = circumradius(a, tol)?;
    let m = a.argmax();
    let mut central_angles: Vec<f64> =
        a.as_slice().iter().map(|&ai| 2.0 * half_angle(ai, radius)).collect();
    let others: f64 = central_angles.iter().enumerate().filter(|&(i, _)| i != m).map(|(_, v)| v).sum();
    central_angles[m] = TAU - others;

    let mut vertices = Vec::with_capacity(a.len());
    let mut phi = 0.0;
    for beta in central_angles.iter().take(a.len()) {
        vertices.push(Point::polar(radius, phi));
        phi += beta;
    }
    Ok(CyclicPolygon { radius, central_angles, branch, vertices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::is_convex_ordered;
    use proptest::prelude::*;

    fn lengths(v: &[f64]) -> EdgeLengths {
        EdgeLengths::new(v.to_vec()).unwrap()
    }

    fn chords(p: &CyclicPolygon) -> Vec<f64> {
        let n = p.vertices.len();
        (0..n).map(|i| p.vertices[i].dist(p.vertices[(i + 1) % n])).collect()
    }

    #[test]
    fn validation_examples() {
        assert!(EdgeLengths::new(vec![1.0, 1.0, 1.0]).is_ok());
        assert_eq!(
            EdgeLengths::new(vec![5.0, 1.0, 1.0, 1.0]),
            Err(LengthError::PolygonInequalityViolated(0))
        );
        assert_eq!(EdgeLengths::new(vec![1.0, 1.0]), Err(LengthError::TooFewSides(2)));
        assert_eq!(EdgeLengths::new(vec![1.0, -1.0, 1.0]), Err(LengthError::NotPositive(1)));
        assert_eq!(EdgeLengths::new(vec![1.0, f64::NAN, 1.0]), Err(LengthError::NotPositive(1)));
        // degenerate equality is outside the open set
        assert_eq!(
            EdgeLengths::new(vec![1.0, 1.0, 2.0]),
            Err(LengthError::PolygonInequalityViolated(2))
        );
        assert!(serde_json::from_str::<EdgeLengths>("[5,1,1,1]").is_err());
    }

    #[test]
    fn equilateral_triangle() {
        let p = solve_cyclic(&lengths(&[1.0, 1.0, 1.0]), DEFAULT_TOL).unwrap();
        assert!((p.radius - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(p.branch, Branch::CenterInside);
        for b in &p.central_angles {
            assert!((b - TAU / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn thales_triangle() {
        let p = solve_cyclic(&lengths(&[3.0, 4.0, 5.0]), DEFAULT_TOL).unwrap();
        assert!((p.radius - 2.5).abs() < 1e-10);
        assert_eq!(p.branch, Branch::CenterOnLongestSide);
        assert!((p.central_angles[2] - PI).abs() < 1e-12);
    }

    #[test]
    fn unit_square() {
        let p = solve_cyclic(&lengths(&[1.0; 4]), DEFAULT_TOL).unwrap();
        assert!((p.radius - 2f64.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(p.branch, Branch::CenterInside);
        for b in &p.central_angles {
            assert!((b - PI / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn obtuse_quadrilateral_round_trip() {
        let a = lengths(&[1.0, 1.0, 1.0, 2.5]);
        let p = solve_cyclic(&a, DEFAULT_TOL).unwrap();
        assert_eq!(p.branch, Branch::CenterOutside);
        for (c, ai) in chords(&p).iter().zip(a.as_slice()) {
            assert!((c - ai).abs() < 1e-9 * ai);
        }
        let mut closure_phi = 0.0;
        for b in &p.central_angles {
            closure_phi += b;
        }
        let last = Point::polar(p.radius, closure_phi);
        assert!(last.dist(p.vertices[0]) < 1e-9 * 2.5);
        assert!(is_convex_ordered(&p.vertices).unwrap());

        // dense scan of g(R) = asin(1/2R)*3 - asin(2.5/2R) over [1.25, 50]
        let g = |r: f64| 3.0 * (0.5 / r).asin() - (1.25 / r).min(1.0).asin();
        let grid: Vec<f64> = (0..=200_000).map(|k| 1.25 + 48.75 * k as f64 / 200_000.0).collect();
        let changes: Vec<usize> = (1..grid.len())
            .filter(|&k| (g(grid[k - 1]) > 0.0) != (g(grid[k]) > 0.0))
            .collect();
        assert_eq!(changes.len(), 1);
        let k = changes[0];
        assert!(grid[k - 1] <= p.radius && p.radius <= grid[k]);
    }

    #[test]
    fn bad_tolerance() {
        assert_eq!(
            solve_cyclic(&lengths(&[1.0; 3]), 0.0).unwrap_err(),
            PennerError::BadTolerance(0.0)
        );
    }

    fn in_w() -> impl Strategy<Value = Vec<f64>> {
        (3usize..=12)
            .prop_flat_map(|n| proptest::collection::vec(0.01..10.0f64, n))
            .prop_filter("in W", |v| validate_lengths(v).is_ok())
    }

    proptest! {
        #[test]
        fn round_trip_closure_convexity(v in in_w()) {
            let a = EdgeLengths::new(v).unwrap();
            let p = solve_cyclic(&a, DEFAULT_TOL).unwrap();
            for (c, ai) in chords(&p).iter().zip(a.as_slice()) {
                prop_assert!((c - ai).abs() < 1e-9 * ai);
            }
            let total: f64 = p.central_angles.iter().sum();
            prop_assert!((total - TAU).abs() < 1e-12);
            prop_assert!(is_convex_ordered(&p.vertices).unwrap());
        }

        #[test]
        fn scale_equivariance(v in in_w(), c in 0.01..100.0f64) {
            let a = EdgeLengths::new(v).unwrap();
            let r1 = solve_cyclic(&a, DEFAULT_TOL).unwrap().radius;
            let r2 = solve_cyclic(&a.scaled(c).unwrap(), DEFAULT_TOL).unwrap().radius;
            prop_assert!((r2 - c * r1).abs() <= 1e-12 * c * r1);
        }

        #[test]
        fn rotation_invariance(v in in_w(), k in 0usize..12) {
            let a = EdgeLengths::new(v.clone()).unwrap();
            let mut w = v.clone();
            w.rotate_left(k % v.len());
            let b = EdgeLengths::new(w).unwrap();
            let pa = solve_cyclic(&a, DEFAULT_TOL).unwrap();
            let pb = solve_cyclic(&b, DEFAULT_TOL).unwrap();
            prop_assert!((pa.radius - pb.radius).abs() <= 1e-12 * pa.radius);
            let mut rot = pa.central_angles.clone();
            rot.rotate_left(k % v.len());
            for (x, y) in rot.iter().zip(&pb.central_angles) {
                prop_assert!((x - y).abs() < 1e-6);
            }
        }
    }
}
