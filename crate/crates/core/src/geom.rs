//! Plane geometry helpers shared by the curve, solver and rendering code.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("zero vector")]
    ZeroVector,
    #[error("consecutive duplicate vertex at index {0}")]
    DuplicateVertex(usize),
    #[error("need at least 3 vertices, got {0}")]
    TooFewVertices(usize),
}

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(r: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(r * c, r * s)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Angle from `z2` to `z1`, i.e. `arg(z1 / z2)` in `(-π, π]`.
pub fn angle_between(z1: Point, z2: Point) -> f64 {
    z2.cross(z1).atan2(z2.dot(z1))
}

/// Remainder term of the triangle inequality for two nonzero vectors.
///
/// Returns `(defect, bound)` with `defect = | |z1+z2| - (|z1|+|z2|) |` and
/// `bound = (1 - cos φ)/2 · (|z1|+|z2|)`, where `φ = arg(z1/z2)`.
/// The bound always dominates the defect.
pub fn triangle_defect_bound(z1: Point, z2: Point) -> Result<(f64, f64), GeomError> {
    let (n1, n2) = (z1.norm(), z2.norm());
    if n1 == 0.0 || n2 == 0.0 {
        return Err(GeomError::ZeroVector);
    }
    let defect = ((z1 + z2).norm() - (n1 + n2)).abs();
    let phi = angle_between(z1, z2);
    let bound = 0.5 * (1.0 - phi.cos()) * (n1 + n2);
    Ok((defect, bound))
}

fn check_vertices(v: &[Point]) -> Result<(), GeomError> {
    if v.len() < 3 {
        return Err(GeomError::TooFewVertices(v.len()));
    }
    for i in 0..v.len() {
        if v[i] == v[(i + 1) % v.len()] {
            return Err(GeomError::DuplicateVertex((i + 1) % v.len()));
        }
    }
    Ok(())
}

/// Strict convexity test for a closed vertex loop in the given order.
///
/// Every turn must have the same strict sign and the loop must wind exactly
/// once, so straight angles and star polygons are rejected.
pub fn is_convex_ordered(v: &[Point]) -> Result<bool, GeomError> {
    check_vertices(v)?;
    let n = v.len();
    let mut sign = 0.0;
    let mut turning = 0.0;
    for i in 0..n {
        let e0 = v[(i + 1) % n] - v[i];
        let e1 = v[(i + 2) % n] - v[(i + 1) % n];
        let c = e0.cross(e1);
        if c == 0.0 {
            return Ok(false);
        }
        if sign == 0.0 {
            sign = c.signum();
        } else if c.signum() != sign {
            return Ok(false);
        }
        turning += angle_between(e1, e0);
    }
    Ok((turning.abs() - 2.0 * PI).abs() < 1e-6)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test; touching and collinear overlap count.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// True iff no two non-adjacent edges of the closed loop intersect.
pub(crate) fn closed_loop_is_simple(v: &[Point]) -> bool {
    let n = v.len();
    for i in 0..n {
        let (a0, a1) = (v[i], v[(i + 1) % n]);
        for j in (i + 2)..n {
            // edge n-1 is adjacent to edge 0
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(a0, a1, v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

pub fn is_simple_polygon(v: &[Point]) -> Result<bool, GeomError> {
    check_vertices(v)?;
    Ok(closed_loop_is_simple(v))
}

/// Shoelace signed area; positive for counterclockwise loops.
pub fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}
