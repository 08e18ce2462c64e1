//! Configuration space and test map.
//!
//! A configuration `(θ₁,…,θₙ, μ)` with `Σθᵢ = 2π` places vertices at the
//! parameters `σᵢ = θ₁+…+θᵢ` of a curve anchored at `A₀ = γ(0)`; the test map
//! returns the `n` side lengths of that polygon scaled by `μ`. Solving the
//! inscribed polygon problem means hitting a target length vector.
//!
//! Newton and degree computations work in the chart `(θ₁,…,θₙ₋₁, μ)` with
//! `θₙ = 2π - Σ_{i<n} θᵢ` eliminated, which keeps the system square.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::curve::Curve;
use crate::geom::{is_convex_ordered, is_simple_polygon, Point};
use crate::penner::EdgeLengths;

/// Sum tolerance for `Σθ = 2π`.
const SUM_TOL: f64 = 1e-12;
/// Jacobians are refused closer than this to the simplex boundary.
pub const JACOBIAN_THETA_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TestMapError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: configuration has {expected} sides, got {got} lengths")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("configuration too close to the boundary (min θ = {min_theta:e})")]
    NearBoundary { min_theta: f64 },
}

/// A point of the configuration space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigPoint {
    theta: Vec<f64>,
    mu: f64,
}

impl ConfigPoint {
    pub fn new(theta: Vec<f64>, mu: f64) -> Result<Self, TestMapError> {
        if theta.len() < 3 {
            return Err(TestMapError::InvalidConfig(format!("need n >= 3 angles, got {}", theta.len())));
        }
        if let Some(i) = theta.iter().position(|t| !(t.is_finite() && *t > 0.0 && *t < TAU)) {
            return Err(TestMapError::InvalidConfig(format!("θ[{i}] = {} outside (0, 2π)", theta[i])));
        }
        let sum: f64 = theta.iter().sum();
        if (sum - TAU).abs() >= SUM_TOL {
            return Err(TestMapError::InvalidConfig(format!("Σθ = {sum} differs from 2π")));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(TestMapError::InvalidConfig(format!("μ = {mu} must be positive")));
        }
        Ok(Self { theta, mu })
    }

    /// Evenly spaced angles `θᵢ = 2π/n`.
    pub fn uniform(n: usize, mu: f64) -> Result<Self, TestMapError> {
        Self::new(vec![TAU / n as f64; n], mu)
    }

    /// Rebuild from chart coordinates `(θ₁,…,θₙ₋₁, μ)`.
    pub fn from_chart(free: &[f64]) -> Result<Self, TestMapError> {
        let n = free.len();
        let mut theta = free[..n - 1].to_vec();
        let last = TAU - theta.iter().sum::<f64>();
        theta.push(last);
        Self::new(theta, free[n - 1])
    }

    pub fn chart(&self) -> Vec<f64> {
        let n = self.theta.len();
        let mut v = self.theta[..n - 1].to_vec();
        v.push(self.mu);
        v
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn min_theta(&self) -> f64 {
        self.theta.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `σ₀ = 0, σ₁, …, σₙ = 2π` (the last one is exact).
    pub fn sigma(&self) -> Vec<f64> {
        let n = self.theta.len();
        let mut s = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        s.push(0.0);
        for t in &self.theta[..n - 1] {
            acc += t;
            s.push(acc);
        }
        s.push(TAU);
        s
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self, TestMapError> {
        Self::new(self.theta.clone(), mu)
    }

    /// Distance in `(θ, log μ)` coordinates.
    pub fn distance(&self, other: &ConfigPoint) -> f64 {
        let d2: f64 = self.theta.iter().zip(&other.theta).map(|(a, b)| (a - b).powi(2)).sum();
        (d2 + (self.mu.ln() - other.mu.ln()).powi(2)).sqrt()
    }
}

/// Curve points `γ(σ₀), …, γ(σₙ₋₁)`; the closing vertex is `γ(σ₀)` itself.
fn on_curve_vertices(curve: &Curve, x: &ConfigPoint) -> Vec<Point> {
    let sigma = x.sigma();
    sigma[..x.n()].iter().map(|&s| curve.eval(s)).collect()
}

/// The test map: `(μ|γ(σ₁)-γ(σ₀)|, …, μ|γ(σₙ)-γ(σₙ₋₁)|)`.
pub fn eval_sl(curve: &Curve, x: &ConfigPoint) -> Vec<f64> {
    let p = on_curve_vertices(curve, x);
    let n = p.len();
    (0..n).map(|i| x.mu * p[i].dist(p[(i + 1) % n])).collect()
}

pub fn residual(curve: &Curve, x: &ConfigPoint, a: &EdgeLengths) -> Result<Vec<f64>, TestMapError> {
    if a.len() != x.n() {
        return Err(TestMapError::DimensionMismatch { expected: x.n(), got: a.len() });
    }
    Ok(eval_sl(curve, x).iter().zip(a.as_slice()).map(|(s, ai)| s - ai).collect())
}

/// Jacobian of the residual in the chart `(θ₁,…,θₙ₋₁, μ)`.
///
/// Uses the chain rule when the curve derivative exists at every vertex and
/// falls back to central differences otherwise.
pub fn jacobian(curve: &Curve, x: &ConfigPoint, a: &EdgeLengths) -> Result<DMatrix<f64>, TestMapError> {
    let n = x.n();
    if a.len() != n {
        return Err(TestMapError::DimensionMismatch { expected: n, got: a.len() });
    }
    if x.min_theta() <= JACOBIAN_THETA_FLOOR {
        return Err(TestMapError::NearBoundary { min_theta: x.min_theta() });
    }
    match analytic_jacobian(curve, x) {
        Some(j) => Ok(j),
        None => Ok(finite_difference_jacobian(curve, x)),
    }
}

fn analytic_jacobian(curve: &Curve, x: &ConfigPoint) -> Option<DMatrix<f64>> {
    let n = x.n();
    let sigma = x.sigma();
    let p = on_curve_vertices(curve, x);
    // derivatives at the moving vertices σ₁..σₙ₋₁; σ₀ and σₙ are pinned
    let mut dp = vec![Point::ORIGIN; n];
    for k in 1..n {
        dp[k] = curve.derivative(sigma[k])?;
    }
    let mut j = DMatrix::zeros(n, n);
    for i in 0..n {
        // side i joins vertex i and vertex i+1 (vertex n is vertex 0)
        let d = p[(i + 1) % n] - p[i];
        let len = d.norm();
        if len == 0.0 {
            return None;
        }
        let u = d * (1.0 / len);
        let head = if i + 1 < n { u.dot(dp[i + 1]) } else { 0.0 };
        let tail = if i >= 1 { u.dot(dp[i]) } else { 0.0 };
        for col in 0..n - 1 {
            // ∂σ_k/∂θ_col = 1 for col < k < n
            let mut v = 0.0;
            if i + 1 < n && col < i + 1 {
                v += head;
            }
            if i >= 1 && col < i {
                v -= tail;
            }
            j[(i, col)] = x.mu * v;
        }
        j[(i, n - 1)] = len;
    }
    Some(j)
}

/// Central-difference Jacobian with step `1e-7·max(1, ‖x‖)` in chart coordinates.
pub fn finite_difference_jacobian(curve: &Curve, x: &ConfigPoint) -> DMatrix<f64> {
    let n = x.n();
    let z = x.chart();
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = 1e-7 * norm.max(1.0);
    let sl = |z: &[f64]| -> Vec<f64> {
        let mut theta = z[..n - 1].to_vec();
        theta.push(TAU - theta.iter().sum::<f64>());
        let cp = ConfigPoint { theta, mu: z[n - 1] };
        eval_sl(curve, &cp)
    };
    let mut j = DMatrix::zeros(n, n);
    for col in 0..n {
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[col] += h;
        zm[col] -= h;
        let (fp, fm) = (sl(&zp), sl(&zm));
        for row in 0..n {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

pub fn residual_vector(curve: &Curve, x: &ConfigPoint, a: &EdgeLengths) -> Result<DVector<f64>, TestMapError> {
    Ok(DVector::from_vec(residual(curve, x, a)?))
}

/// Polygon realized by a configuration on a curve.
#[derive(Debug, Clone, Serialize)]
pub struct InscribedPolygon {
    /// `σ₀ = 0 < σ₁ < … < σₙ = 2π`.
    pub sigma: Vec<f64>,
    /// On-curve vertices `A′ᵢ = γ(σᵢ)`, `i < n`.
    pub on_curve: Vec<Point>,
    /// Scaled vertices `Aᵢ = A₀ + μ(γ(σᵢ) - γ(0))`, `i < n`.
    pub scaled: Vec<Point>,
    pub convex: bool,
    pub simple: bool,
}

impl InscribedPolygon {
    pub fn new(curve: &Curve, x: &ConfigPoint) -> Self {
        let on_curve = on_curve_vertices(curve, x);
        let a0 = on_curve[0];
        let scaled = on_curve.iter().map(|&p| a0 + (p - a0) * x.mu).collect();
        let convex = is_convex_ordered(&on_curve).unwrap_or(false);
        let simple = is_simple_polygon(&on_curve).unwrap_or(false);
        Self { sigma: x.sigma(), on_curve, scaled, convex, simple }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_curve, CurveSpec};
    use crate::penner::{solve_cyclic, DEFAULT_TOL};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn circle() -> Curve {
        build_curve(&CurveSpec::circle(1.0)).unwrap()
    }

    fn lengths(v: &[f64]) -> EdgeLengths {
        EdgeLengths::new(v.to_vec()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ConfigPoint::new(vec![1.0, 2.0, 3.0], 1.0).is_err());
        assert!(ConfigPoint::new(vec![TAU / 3.0; 3], 0.0).is_err());
        assert!(ConfigPoint::new(vec![0.0, PI, PI], 1.0).is_err());
        assert!(ConfigPoint::new(vec![PI, PI], 1.0).is_err());
        let x = ConfigPoint::uniform(4, 2.0).unwrap();
        let s = x.sigma();
        assert_eq!(s.len(), 5);
        assert_eq!(s[4], TAU);
        let y = ConfigPoint::from_chart(&x.chart()).unwrap();
        assert!(x.distance(&y) < 1e-15);
    }

    #[test]
    fn eval_sl_examples() {
        let c = circle();
        let x = ConfigPoint::uniform(3, 1.0).unwrap();
        for s in eval_sl(&c, &x) {
            assert!((s - 3f64.sqrt()).abs() < 1e-14);
        }
        let x = ConfigPoint::uniform(4, 2.0).unwrap();
        for s in eval_sl(&c, &x) {
            assert!((s - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn residual_examples() {
        let c = circle();
        let x = ConfigPoint::uniform(3, 1.0).unwrap();
        let r = residual(&c, &x, &lengths(&[3f64.sqrt(); 3])).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-14));
        let r = residual(&c, &x, &lengths(&[1.0; 3])).unwrap();
        assert!(r.iter().all(|v| (v - (3f64.sqrt() - 1.0)).abs() < 1e-14));
        assert_eq!(
            residual(&c, &x, &lengths(&[1.0; 4])),
            Err(TestMapError::DimensionMismatch { expected: 3, got: 4 })
        );
    }

    #[test]
    fn penner_configuration_is_a_zero() {
        let a = lengths(&[1.0, 1.0, 1.0, 2.5]);
        let p = solve_cyclic(&a, DEFAULT_TOL).unwrap();
        let x = ConfigPoint::new(p.central_angles.clone(), p.radius).unwrap();
        let r = residual(&circle(), &x, &a).unwrap();
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm < 1e-9, "{norm}");
    }

    #[test]
    fn jacobian_mu_column_and_regularity() {
        let c = circle();
        let x = ConfigPoint::uniform(3, 1.0).unwrap();
        let a = lengths(&[1.0; 3]);
        let j = jacobian(&c, &x, &a).unwrap();
        let sl = eval_sl(&c, &x);
        for i in 0..3 {
            assert!((j[(i, 2)] - sl[i] / x.mu()).abs() < 1e-14);
        }
        assert!(j.determinant().abs() > 1e-3);
    }

    #[test]
    fn jacobian_near_boundary() {
        let x = ConfigPoint::new(vec![1e-10, PI, PI - 1e-10], 1.0).unwrap();
        assert!(matches!(
            jacobian(&circle(), &x, &lengths(&[1.0; 3])),
            Err(TestMapError::NearBoundary { .. })
        ));
    }

    #[test]
    fn analytic_matches_finite_differences() {
        let specs = [
            CurveSpec::ellipse(2.0, 1.0),
            CurveSpec::star(vec![1.0, 0.0, 0.0, 0.3], vec![]),
            CurveSpec::circle(3.0).with_phase(1.0),
        ];
        let thetas = [vec![1.0, 2.0, TAU - 3.0], vec![0.5, 1.7, 2.2, TAU - 4.4], vec![0.3, 0.9, 1.4, 1.1, TAU - 3.7]];
        for spec in &specs {
            let c = build_curve(spec).unwrap();
            for th in &thetas {
                let x = ConfigPoint::new(th.clone(), 0.7).unwrap();
                let a = EdgeLengths::new(vec![1.0; th.len()]).unwrap();
                let ja = jacobian(&c, &x, &a).unwrap();
                let jf = finite_difference_jacobian(&c, &x);
                let scale = ja.amax();
                assert!((ja - jf).amax() < 1e-5 * scale, "{spec:?} {th:?}");
            }
        }
    }

    #[test]
    fn polyline_uses_finite_differences_at_knots() {
        let sq = CurveSpec::Polyline {
            points: vec![[0.0, 0.0].into(), [1.0, 0.0].into(), [1.0, 1.0].into(), [0.0, 1.0].into()],
            phase: 0.0,
        };
        let c = build_curve(&sq).unwrap();
        let x = ConfigPoint::uniform(4, 1.0).unwrap();
        // every vertex sits on a knot
        assert!(analytic_jacobian(&c, &x).is_none());
        let j = jacobian(&c, &x, &lengths(&[1.0; 4])).unwrap();
        assert!(j.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn inscribed_polygon_closure() {
        let c = build_curve(&CurveSpec::ellipse(2.0, 1.0)).unwrap();
        let x = ConfigPoint::uniform(4, 1.5).unwrap();
        let p = InscribedPolygon::new(&c, &x);
        assert_eq!(p.on_curve[0], c.eval(0.0));
        assert_eq!(p.scaled[0], p.on_curve[0]);
        assert!(p.convex && p.simple);
        let sl = eval_sl(&c, &x);
        for i in 0..4 {
            assert!((p.scaled[i].dist(p.scaled[(i + 1) % 4]) - sl[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn shrinking_angle_kills_its_side() {
        let c = build_curve(&CurveSpec::ellipse(2.0, 1.0)).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..12 {
            let eps = 10f64.powi(-k);
            let x = ConfigPoint::new(vec![eps, 2.0, TAU - 2.0 - eps], 3.0).unwrap();
            let s0 = eval_sl(&c, &x)[0];
            assert!(s0 < prev);
            // chord ≤ μ · max|γ′| · θ₁, with max|γ′| = 2
            assert!(s0 <= 3.0 * 2.0 * eps * (1.0 + 1e-9));
            prev = s0;
        }
    }

    fn interior_config(n: usize) -> impl Strategy<Value = (Vec<f64>, f64)> {
        (proptest::collection::vec(0.05..1.0f64, n), 0.1..10.0f64).prop_map(|(w, mu)| {
            let s: f64 = w.iter().sum();
            let mut theta: Vec<f64> = w.iter().map(|v| v / s * TAU).collect();
            let head: f64 = theta[..theta.len() - 1].iter().sum();
            *theta.last_mut().unwrap() = TAU - head;
            (theta, mu)
        })
    }

    proptest! {
        #[test]
        fn mu_linearity((theta, mu) in interior_config(5), c in 0.01..100.0f64) {
            let curve = build_curve(&CurveSpec::ellipse(2.0, 1.0)).unwrap();
            let x = ConfigPoint::new(theta, mu).unwrap();
            let y = x.with_mu(c * mu).unwrap();
            for (s, t) in eval_sl(&curve, &x).iter().zip(eval_sl(&curve, &y)) {
                prop_assert!((t - c * s).abs() <= 1e-13 * t.abs().max(1.0));
            }
        }

        #[test]
        fn sides_bounded_by_scaled_diameter((theta, mu) in interior_config(4)) {
            let curve = build_curve(&CurveSpec::star(vec![1.0, 0.0, 0.0, 0.3], vec![])).unwrap();
            let diam = curve.diameter(1024);
            let x = ConfigPoint::new(theta, mu).unwrap();
            for s in eval_sl(&curve, &x) {
                prop_assert!(s <= mu * diam * (1.0 + 1e-4));
            }
        }
    }
}
