//! Parameterized closed curves on `[0, 2π)`.
//!
//! A [`CurveSpec`] is the serializable description; [`Curve`] is the realized
//! evaluator. Every constructed curve is oriented counterclockwise and has its
//! basepoint `A₀ = γ(0)` placed by the spec's `phase`.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{segments_intersect, signed_area, Point};

/// Samples used for orientation and positivity checks of the radial function.
const ORIENTATION_SAMPLES: usize = 1024;
const RADIAL_CHECK_SAMPLES: usize = 4096;
/// Parameter distance below which a polyline knot is considered hit.
const KNOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("radial function is not positive (ρ = {value} at α = {alpha})")]
    NonPositiveRadial { alpha: f64, value: f64 },
    #[error("polyline is self-intersecting (edges {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveSpec {
    Circle {
        #[serde(default)]
        center: Point,
        radius: f64,
        #[serde(default)]
        phase: f64,
    },
    Ellipse {
        #[serde(default)]
        center: Point,
        a: f64,
        b: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `ρ(α) = Σ cos[k]·cos(kα) + Σ sin[k]·sin(kα)`, `k` from 0.
    Star {
        #[serde(default)]
        center: Point,
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
        #[serde(default)]
        phase: f64,
    },
    /// Coordinate series `x(α)`, `y(α)` with the same indexing as `Star`.
    Fourier {
        #[serde(default)]
        x_cos: Vec<f64>,
        #[serde(default)]
        x_sin: Vec<f64>,
        #[serde(default)]
        y_cos: Vec<f64>,
        #[serde(default)]
        y_sin: Vec<f64>,
        #[serde(default)]
        phase: f64,
    },
    Polyline {
        points: Vec<Point>,
        #[serde(default)]
        phase: f64,
    },
}

impl CurveSpec {
    pub fn circle(radius: f64) -> Self {
        CurveSpec::Circle { center: Point::ORIGIN, radius, phase: 0.0 }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        CurveSpec::Ellipse { center: Point::ORIGIN, a, b, phase: 0.0 }
    }

    pub fn star(cos: Vec<f64>, sin: Vec<f64>) -> Self {
        CurveSpec::Star { center: Point::ORIGIN, cos, sin, phase: 0.0 }
    }

    pub fn phase(&self) -> f64 {
        match self {
            CurveSpec::Circle { phase, .. }
            | CurveSpec::Ellipse { phase, .. }
            | CurveSpec::Star { phase, .. }
            | CurveSpec::Fourier { phase, .. }
            | CurveSpec::Polyline { phase, .. } => *phase,
        }
    }

    pub fn with_phase(mut self, alpha0: f64) -> Self {
        match &mut self {
            CurveSpec::Circle { phase, .. }
            | CurveSpec::Ellipse { phase, .. }
            | CurveSpec::Star { phase, .. }
            | CurveSpec::Fourier { phase, .. }
            | CurveSpec::Polyline { phase, .. } => *phase = alpha0,
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    Analytic,
    C1Piecewise,
    Polyline,
}

#[derive(Debug, Clone)]
enum Shape {
    Circle { center: Point, radius: f64 },
    Ellipse { center: Point, a: f64, b: f64 },
    Star { center: Point, cos: Vec<f64>, sin: Vec<f64> },
    Fourier { x: (Vec<f64>, Vec<f64>), y: (Vec<f64>, Vec<f64>) },
    /// `knots[k]` is the parameter of `points[k]`; `knots[m] = 2π` closes the loop.
    Polyline { points: Vec<Point>, knots: Vec<f64> },
    /// Radial blend of `target` about `center` towards the circle of radius `mean_radius`.
    Radial { target: Arc<Curve>, center: Point, mean_radius: f64, t: f64 },
}

/// An oriented closed curve `γ: R/2πZ → R²`.
#[derive(Debug, Clone)]
pub struct Curve {
    shape: Shape,
    phase: f64,
    /// +1 or -1; the raw shape is traversed backwards when it is clockwise.
    direction: f64,
    smoothness: Smoothness,
}

fn series(c: &[f64], s: &[f64], a: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut dv = 0.0;
    for (k, &ck) in c.iter().enumerate() {
        let (sn, cs) = (k as f64 * a).sin_cos();
        v += ck * cs;
        dv -= ck * k as f64 * sn;
    }
    for (k, &sk) in s.iter().enumerate() {
        let (sn, cs) = (k as f64 * a).sin_cos();
        v += sk * sn;
        dv += sk * k as f64 * cs;
    }
    (v, dv)
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn degenerate(msg: impl Into<String>) -> CurveError {
    CurveError::DegenerateCurve(msg.into())
}

impl Shape {
    fn eval(&self, a: f64) -> Point {
        match self {
            Shape::Circle { center, radius } => *center + Point::polar(*radius, a),
            Shape::Ellipse { center, a: ax, b: bx } => {
                let (s, c) = a.sin_cos();
                *center + Point::new(ax * c, bx * s)
            }
            Shape::Star { center, cos, sin } => *center + Point::polar(series(cos, sin, a).0, a),
            Shape::Fourier { x, y } => Point::new(series(&x.0, &x.1, a).0, series(&y.0, &y.1, a).0),
            Shape::Polyline { points, knots } => {
                let a = a.rem_euclid(TAU);
                let k = polyline_segment(knots, a);
                let m = points.len();
                let s = (a - knots[k]) / (knots[k + 1] - knots[k]);
                points[k] * (1.0 - s) + points[(k + 1) % m] * s
            }
            Shape::Radial { target, center, mean_radius, t } => {
                let v = target.eval(a) - *center;
                let r = v.norm();
                *center + v * (((1.0 - t) * mean_radius + t * r) / r)
            }
        }
    }

    fn derivative(&self, a: f64) -> Option<Point> {
        match self {
            Shape::Circle { radius, .. } => Some(Point::polar(*radius, a + TAU / 4.0)),
            Shape::Ellipse { a: ax, b: bx, .. } => {
                let (s, c) = a.sin_cos();
                Some(Point::new(-ax * s, bx * c))
            }
            Shape::Star { cos, sin, .. } => {
                let (r, dr) = series(cos, sin, a);
                let (s, c) = a.sin_cos();
                Some(Point::new(dr * c - r * s, dr * s + r * c))
            }
            Shape::Fourier { x, y } => {
                Some(Point::new(series(&x.0, &x.1, a).1, series(&y.0, &y.1, a).1))
            }
            Shape::Polyline { points, knots } => {
                let a = a.rem_euclid(TAU);
                let k = polyline_segment(knots, a);
                let near = |q: f64| (a - q).abs() < KNOT_EPS || (a - q + TAU).abs() < KNOT_EPS;
                if near(knots[k]) || near(knots[k + 1]) {
                    return None;
                }
                let m = points.len();
                Some((points[(k + 1) % m] - points[k]) * (1.0 / (knots[k + 1] - knots[k])))
            }
            Shape::Radial { target, center, mean_radius, t } => {
                let v = target.eval(a) - *center;
                let dv = target.derivative(a)?;
                let r = v.norm();
                let dr = v.dot(dv) / r;
                let s = (1.0 - t) * mean_radius + t * r;
                let ds = t * dr;
                let u = v * (1.0 / r);
                let du = (dv - u * dr) * (1.0 / r);
                Some(u * ds + du * s)
            }
        }
    }
}

fn polyline_segment(knots: &[f64], a: f64) -> usize {
    // last k with knots[k] <= a, clamped to a valid segment
    let k = knots.partition_point(|&q| q <= a);
    k.saturating_sub(1).min(knots.len() - 2)
}

fn polyline_shape(points: &[Point]) -> Result<Shape, CurveError> {
    let m = points.len();
    if m < 3 {
        return Err(degenerate(format!("polyline needs at least 3 points, got {m}")));
    }
    if !points.iter().all(|p| p.is_finite()) {
        return Err(degenerate("polyline has non-finite coordinates"));
    }
    for i in 0..m {
        if points[i] == points[(i + 1) % m] {
            return Err(degenerate(format!("repeated polyline point at index {}", (i + 1) % m)));
        }
    }
    for i in 0..m {
        for j in (i + 2)..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            if segments_intersect(points[i], points[(i + 1) % m], points[j], points[(j + 1) % m]) {
                return Err(CurveError::SelfIntersecting(i, j));
            }
        }
    }
    let mut knots = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    knots.push(0.0);
    for i in 0..m {
        acc += points[i].dist(points[(i + 1) % m]);
        knots.push(acc);
    }
    let total = acc;
    for q in knots.iter_mut() {
        *q *= TAU / total;
    }
    knots[m] = TAU;
    Ok(Shape::Polyline { points: points.to_vec(), knots })
}

impl Curve {
    pub fn from_spec(spec: &CurveSpec) -> Result<Curve, CurveError> {
        build_curve(spec)
    }

    fn oriented(shape: Shape, phase: f64, smoothness: Smoothness) -> Result<Curve, CurveError> {
        if !phase.is_finite() {
            return Err(degenerate("phase must be finite"));
        }
        let mut curve = Curve { shape, phase: phase.rem_euclid(TAU), direction: 1.0, smoothness };
        let area = signed_area(&curve.sample(ORIENTATION_SAMPLES));
        if !area.is_finite() {
            return Err(degenerate("curve evaluates to non-finite points"));
        }
        if area < 0.0 {
            curve.direction = -1.0;
        }
        Ok(curve)
    }

    /// Radial blend used by the homotopy family; `target` must be star-shaped about `center`.
    pub(crate) fn radial_blend(target: Arc<Curve>, center: Point, mean_radius: f64, t: f64) -> Curve {
        let smoothness = target.smoothness;
        Curve {
            shape: Shape::Radial { target, center, mean_radius, t },
            phase: 0.0,
            direction: 1.0,
            smoothness,
        }
    }

    #[inline]
    fn param(&self, alpha: f64) -> f64 {
        self.phase + self.direction * alpha
    }

    pub fn eval(&self, alpha: f64) -> Point {
        self.shape.eval(self.param(alpha))
    }

    /// `γ'(α)`, or `None` where the curve has no derivative (polyline knots).
    pub fn derivative(&self, alpha: f64) -> Option<Point> {
        self.shape.derivative(self.param(alpha)).map(|d| d * self.direction)
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    /// The basepoint `A₀ = γ(0)`.
    pub fn basepoint(&self) -> Point {
        self.eval(0.0)
    }

    pub fn chord(&self, alpha: f64, beta: f64) -> f64 {
        self.eval(alpha).dist(self.eval(beta))
    }

    /// `count` points at equally spaced parameters `2πk/count`.
    pub fn sample(&self, count: usize) -> Vec<Point> {
        (0..count).map(|k| self.eval(TAU * k as f64 / count as f64)).collect()
    }

    /// Sampled simplicity check: the closed polyline through `samples` equally
    /// spaced parameters has no crossing between non-adjacent segments.
    /// A necessary condition only.
    pub fn check_simple(&self, samples: usize) -> bool {
        crate::geom::closed_loop_is_simple(&self.sample(samples.max(64)))
    }

    /// Largest pairwise distance among `samples` sampled points.
    pub fn diameter(&self, samples: usize) -> f64 {
        let pts = self.sample(samples.max(64));
        let mut best: f64 = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let dx = pts[i].x - pts[j].x;
                let dy = pts[i].y - pts[j].y;
                best = best.max(dx * dx + dy * dy);
            }
        }
        best.sqrt()
    }

    /// Vertex centroid of `samples` sampled points.
    pub fn centroid(&self, samples: usize) -> Point {
        let pts = self.sample(samples);
        let s = pts.iter().fold(Point::ORIGIN, |acc, &p| acc + p);
        s * (1.0 / pts.len() as f64)
    }
}

pub fn build_curve(spec: &CurveSpec) -> Result<Curve, CurveError> {
    match spec {
        CurveSpec::Circle { center, radius, phase } => {
            if !(radius.is_finite() && *radius > 0.0) || !center.is_finite() {
                return Err(degenerate(format!("circle radius must be positive, got {radius}")));
            }
            Curve::oriented(Shape::Circle { center: *center, radius: *radius }, *phase, Smoothness::Analytic)
        }
        CurveSpec::Ellipse { center, a, b, phase } => {
            let ok = |v: f64| v.is_finite() && v > 0.0;
            if !ok(*a) || !ok(*b) || !center.is_finite() {
                return Err(degenerate(format!("ellipse semi-axes must be positive, got ({a}, {b})")));
            }
            Curve::oriented(Shape::Ellipse { center: *center, a: *a, b: *b }, *phase, Smoothness::Analytic)
        }
        CurveSpec::Star { center, cos, sin, phase } => {
            if cos.is_empty() && sin.is_empty() {
                return Err(degenerate("star curve has no coefficients"));
            }
            if !all_finite(cos) || !all_finite(sin) || !center.is_finite() {
                return Err(degenerate("star coefficients must be finite"));
            }
            for k in 0..RADIAL_CHECK_SAMPLES {
                let alpha = TAU * k as f64 / RADIAL_CHECK_SAMPLES as f64;
                let value = series(cos, sin, alpha).0;
                if value <= 0.0 {
                    return Err(CurveError::NonPositiveRadial { alpha, value });
                }
            }
            let shape = Shape::Star { center: *center, cos: cos.clone(), sin: sin.clone() };
            Curve::oriented(shape, *phase, Smoothness::Analytic)
        }
        CurveSpec::Fourier { x_cos, x_sin, y_cos, y_sin, phase } => {
            if ![x_cos, x_sin, y_cos, y_sin].iter().all(|v| all_finite(v)) {
                return Err(degenerate("fourier coefficients must be finite"));
            }
            let nonconst = |c: &[f64], s: &[f64]| {
                c.iter().skip(1).chain(s.iter().skip(1)).any(|&v| v != 0.0)
            };
            if !nonconst(x_cos, x_sin) || !nonconst(y_cos, y_sin) {
                return Err(degenerate("fourier curve needs a non-constant term in both coordinates"));
            }
            let shape = Shape::Fourier {
                x: (x_cos.clone(), x_sin.clone()),
                y: (y_cos.clone(), y_sin.clone()),
            };
            Curve::oriented(shape, *phase, Smoothness::Analytic)
        }
        CurveSpec::Polyline { points, phase } => {
            Curve::oriented(polyline_shape(points)?, *phase, Smoothness::Polyline)
        }
    }
}
