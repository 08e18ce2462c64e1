use std::f64::consts::TAU;
use std::sync::Arc;

use super::{newton_solve, multistart_solve, Provenance, SolveResult, SolveStats, Solution, SolverError, SolverOptions};
use crate::curve::{build_curve, Curve, CurveSpec};
use crate::geom::Point;
use crate::penner::{solve_cyclic, EdgeLengths, DEFAULT_TOL};
use crate::testmap::ConfigPoint;

const STAR_CHECK_SAMPLES: usize = 4096;
const CENTROID_SAMPLES: usize = 1024;
const INVERSION_BISECTIONS: usize = 100;

/// Radial deformation of a star-shaped curve into a circle.
///
/// With `v(α) = γ(α) - c` the family is
/// `γ_t(α) = c + [(1-t)·ρ̄ + t·|v(α)|]·v(α)/|v(α)|`, where `ρ̄` is the mean of
/// `|v|` over the parameter circle. `γ₀` is the circle of radius `ρ̄` about
/// `c`, `γ₁` is the target itself, and every member is a positive radial
/// graph, hence a Jordan curve.
#[derive(Debug, Clone)]
pub struct HomotopyFamily {
    target: Arc<Curve>,
    center: Point,
    mean_radius: f64,
}

impl HomotopyFamily {
    pub fn new(target: Curve, center: Option<Point>) -> Result<Self, SolverError> {
        let center = center.unwrap_or_else(|| target.centroid(CENTROID_SAMPLES));
        let v: Vec<Point> = target.sample(STAR_CHECK_SAMPLES).into_iter().map(|p| p - center).collect();
        let m = v.len();
        let alpha_at = |k: usize| TAU * k as f64 / m as f64;
        let mut winding = 0.0;
        for k in 0..m {
            let (p, q) = (v[k], v[(k + 1) % m]);
            if p.norm() == 0.0 || p.cross(q) <= 0.0 {
                return Err(SolverError::NotStarShaped { center, alpha: alpha_at(k) });
            }
            winding += p.cross(q).atan2(p.dot(q));
        }
        if (winding - TAU).abs() > 1e-6 {
            return Err(SolverError::NotStarShaped { center, alpha: 0.0 });
        }
        let mean_radius = v.iter().map(|p| p.norm()).sum::<f64>() / m as f64;
        Ok(Self { target: Arc::new(target), center, mean_radius })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn mean_radius(&self) -> f64 {
        self.mean_radius
    }

    pub fn target(&self) -> &Curve {
        &self.target
    }

    pub fn at(&self, t: f64) -> Curve {
        Curve::radial_blend(self.target.clone(), self.center, self.mean_radius, t.clamp(0.0, 1.0))
    }

    /// Angle of `γ(σ) - c` measured counterclockwise from the basepoint direction, in `[0, 2π)`.
    fn relative_angle(&self, sigma: f64) -> f64 {
        let base = (self.target.eval(0.0) - self.center).angle();
        ((self.target.eval(sigma) - self.center).angle() - base).rem_euclid(TAU)
    }

    /// Parameter whose direction from the center is `phi` past the basepoint's.
    fn invert_angle(&self, phi: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, TAU);
        for _ in 0..INVERSION_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.relative_angle(mid) < phi {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// The homotopy member `γ_t` for `spec`, about `center` (default: sample centroid).
pub fn homotopy_family(spec: &CurveSpec, t: f64, center: Option<Point>) -> Result<Curve, SolverError> {
    Ok(HomotopyFamily::new(build_curve(spec)?, center)?.at(t))
}

/// Exact zero of the test map on the family's circle `γ₀`: the cyclic polygon
/// with sides `a`, rotated so its first vertex is the basepoint and scaled by
/// `μ = R/ρ̄`.
pub fn penner_seed(family: &HomotopyFamily, a: &EdgeLengths) -> Result<ConfigPoint, SolverError> {
    let poly = solve_cyclic(a, DEFAULT_TOL)?;
    let n = a.len();
    let mut sigma = Vec::with_capacity(n + 1);
    sigma.push(0.0);
    let mut phi = 0.0;
    for beta in &poly.central_angles[..n - 1] {
        phi += beta;
        sigma.push(family.invert_angle(phi));
    }
    sigma.push(TAU);
    let theta: Vec<f64> = sigma.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(ConfigPoint::new(theta, poly.radius / family.mean_radius())?)
}

/// Track the circle solution along the radial homotopy to the target curve.
///
/// Falls through to [`multistart_solve`] when the target is not star-shaped.
pub fn continuation_solve(spec: &CurveSpec, a: &EdgeLengths, opts: &SolverOptions) -> Result<SolveResult, SolverError> {
    opts.validate(a.len())?;
    let target = build_curve(spec)?;
    let family = match HomotopyFamily::new(target, opts.star_center) {
        Ok(f) => f,
        Err(SolverError::NotStarShaped { .. }) => return multistart_solve(spec, a, opts),
        Err(e) => return Err(e),
    };
    let mut stats = SolveStats { starts: 1, ..Default::default() };
    let mut x = penner_seed(&family, a)?;

    let initial = 1.0 / opts.homotopy_steps as f64;
    let mut dt = initial;
    let mut t = 0.0;
    let mut streak = 0;
    while t < 1.0 {
        let t_next = (t + dt).min(1.0);
        let curve = family.at(t_next);
        let local = SolverOptions { mu_bounds: Some(opts.mu_bounds_for(&curve, a)), ..opts.clone() };
        match newton_solve(&curve, a, &x, &local) {
            Ok(out) => {
                x = out.x;
                t = t_next;
                streak += 1;
                if streak >= 2 && dt < initial {
                    dt = (dt * 2.0).min(initial);
                    streak = 0;
                }
            }
            Err(e) => {
                stats.failures += 1;
                if matches!(e, SolverError::BoundaryEscape(_)) {
                    stats.boundary_rejections += 1;
                }
                streak = 0;
                dt *= 0.5;
                if dt < opts.min_homotopy_step {
                    return Err(SolverError::PathFailure { last_t: t });
                }
            }
        }
    }

    // final correction on the target curve itself rather than γ₁
    let target = family.target();
    let out = newton_solve(target, a, &x, opts)?;
    let solution = Solution::new(target, a, out.x, Provenance::Homotopy)?;
    Ok(SolveResult { solutions: vec![solution], stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testmap::{eval_sl, residual};
    use std::f64::consts::PI;

    fn lengths(v: &[f64]) -> EdgeLengths {
        EdgeLengths::new(v.to_vec()).unwrap()
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    #[test]
    fn family_endpoints() {
        let spec = CurveSpec::ellipse(2.0, 1.0);
        let fam = HomotopyFamily::new(build_curve(&spec).unwrap(), None).unwrap();
        let target = build_curve(&spec).unwrap();
        let g0 = fam.at(0.0);
        let g1 = fam.at(1.0);
        for k in 0..100 {
            let a = 0.0628 * k as f64;
            assert!((g0.eval(a).dist(fam.center()) - fam.mean_radius()).abs() < 1e-12);
            assert!(g1.eval(a).dist(target.eval(a)) < 1e-12);
        }
    }

    #[test]
    fn ellipse_half_blend_min_radius() {
        let spec = CurveSpec::ellipse(2.0, 1.0);
        let fam = HomotopyFamily::new(build_curve(&spec).unwrap(), None).unwrap();
        // mean of sqrt(4cos² + sin²) by fine trapezoid quadrature
        let m = 200_000;
        let rho_bar: f64 = (0..m)
            .map(|k| {
                let a = TAU * k as f64 / m as f64;
                (4.0 * a.cos().powi(2) + a.sin().powi(2)).sqrt()
            })
            .sum::<f64>()
            / m as f64;
        assert!((fam.mean_radius() - rho_bar).abs() < 1e-9);
        let half = fam.at(0.5);
        let min_r = half.sample(4096).iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
        assert!((min_r - (rho_bar + 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn non_star_target_rejected() {
        // a thin crescent-like polyline that the centroid cannot see entirely
        let spec = CurveSpec::Polyline {
            points: vec![
                [0.0, 0.0].into(),
                [4.0, 0.0].into(),
                [4.0, 3.0].into(),
                [3.0, 3.0].into(),
                [3.0, 1.0].into(),
                [1.0, 1.0].into(),
                [1.0, 3.0].into(),
                [0.0, 3.0].into(),
            ],
            phase: 0.0,
        };
        let err = homotopy_family(&spec, 0.5, Some(Point::new(2.0, 2.5))).unwrap_err();
        assert!(matches!(err, SolverError::NotStarShaped { .. }));
    }

    #[test]
    fn seeds_on_circle() {
        let fam = HomotopyFamily::new(build_curve(&CurveSpec::circle(1.0)).unwrap(), None).unwrap();
        let x = penner_seed(&fam, &lengths(&[1.0; 3])).unwrap();
        for t in x.theta() {
            assert!((t - TAU / 3.0).abs() < 1e-9);
        }
        assert!((x.mu() - 1.0 / 3f64.sqrt()).abs() < 1e-9);
        let x = penner_seed(&fam, &lengths(&[1.0; 4])).unwrap();
        for t in x.theta() {
            assert!((t - PI / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn thales_seed_round_trip() {
        let spec = CurveSpec::circle(2.0).with_phase(0.3);
        let fam = HomotopyFamily::new(build_curve(&spec).unwrap(), None).unwrap();
        let a = lengths(&[3.0, 4.0, 5.0]);
        let x = penner_seed(&fam, &a).unwrap();
        let sl = eval_sl(&fam.at(0.0), &x);
        for (s, ai) in sl.iter().zip(a.as_slice()) {
            assert!((s - ai).abs() < 1e-9);
        }
        // hypotenuse spans a diameter
        assert!((x.theta()[2] - PI).abs() < 1e-9);
        assert!((x.mu() - 2.5 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn seed_is_exact_on_reparameterized_circle() {
        // the ellipse family's γ₀ is a circle traversed at a non-uniform speed
        let fam = HomotopyFamily::new(build_curve(&CurveSpec::ellipse(2.0, 1.0)).unwrap(), None).unwrap();
        let a = lengths(&[1.0, 1.3, 0.8, 1.1]);
        let x = penner_seed(&fam, &a).unwrap();
        assert!(max_abs(&residual(&fam.at(0.0), &x, &a).unwrap()) < 1e-9);
    }

    #[test]
    fn circle_continuation_is_the_seed() {
        let spec = CurveSpec::circle(1.0);
        let a = lengths(&[1.0, 1.2, 0.9, 1.4]);
        let res = continuation_solve(&spec, &a, &SolverOptions::default()).unwrap();
        let fam = HomotopyFamily::new(build_curve(&spec).unwrap(), None).unwrap();
        let seed = penner_seed(&fam, &a).unwrap();
        assert_eq!(res.solutions.len(), 1);
        assert!(res.solutions[0].config.distance(&seed) < 1e-10);
    }

    #[test]
    fn ellipse_continuation() {
        let spec = CurveSpec::ellipse(2.0, 1.0);
        let a = lengths(&[1.0; 4]);
        let res = continuation_solve(&spec, &a, &SolverOptions::default()).unwrap();
        let s = &res.solutions[0];
        assert!(s.residual < 1e-10);
        assert!(s.convex);
        assert!(s.polygon.sigma.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s.provenance, Provenance::Homotopy);
    }

    #[test]
    fn trefoil_star_continuation() {
        let spec = CurveSpec::star(vec![1.0, 0.0, 0.0, 0.3], vec![]);
        let a = lengths(&[1.0; 5]);
        let res = continuation_solve(&spec, &a, &SolverOptions::default()).unwrap();
        let s = &res.solutions[0];
        assert!(s.residual < 1e-10);
        assert!(s.polygon.sigma.windows(2).all(|w| w[0] < w[1]));
    }
}
