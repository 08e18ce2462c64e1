//! Brute-force grid search for inscribed polygons, independent of the solver.
//!
//! The search is over chord ratios only: a grid tuple is good when the chords
//! `cᵢ` are proportional to the targets `aᵢ`, and `μ` is fitted afterwards.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::curve::Curve;
use crate::geom::Point;
use crate::penner::EdgeLengths;

pub const MAX_SIDES: usize = 4;
pub const MIN_GRID: usize = 64;
const REFINE_ROUNDS: usize = 3;
const REFINE_FACTOR: f64 = 8.0;
const REFINE_REACH: i64 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("grid search supports at most {MAX_SIDES} sides, got {0}")]
    TooManySides(usize),
    #[error("grid size {0} is below the minimum of {MIN_GRID}")]
    GridTooSmall(usize),
    #[error("no grid tuple below the proportionality threshold at N = {0}")]
    GridTooCoarse(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSolution {
    /// `σ₀ = 0, σ₁, …, σₙ₋₁, σₙ = 2π` at the winning grid tuple.
    pub coarse_sigma: Vec<f64>,
    /// Proportionality error at the grid tuple.
    pub coarse_error: f64,
    /// `σ` after local refinement.
    pub sigma: Vec<f64>,
    pub theta: Vec<f64>,
    /// Least-squares scale of the refined chords onto `a`.
    pub mu: f64,
    /// Proportionality error after refinement.
    pub proportionality_error: f64,
    pub grid: usize,
}

/// `max |qᵢ − q̄| / q̄` for `qᵢ = cᵢ / aᵢ`.
pub fn proportionality_error(chords: &[f64], a: &[f64]) -> f64 {
    let q: Vec<f64> = chords.iter().zip(a).map(|(c, a)| c / a).collect();
    let mean = q.iter().sum::<f64>() / q.len() as f64;
    if !(mean > 0.0) {
        return f64::INFINITY;
    }
    q.iter().fold(0.0f64, |m, v| m.max((v - mean).abs())) / mean
}

fn chords_at(curve: &Curve, sigma: &[f64]) -> Vec<f64> {
    let pts: Vec<Point> = sigma.iter().map(|&s| curve.eval(s)).collect();
    (0..pts.len()).map(|i| pts[i].dist(pts[(i + 1) % pts.len()])).collect()
}

struct Table {
    n: usize,
    dist: Vec<f64>,
}

impl Table {
    fn new(curve: &Curve, n: usize) -> Self {
        let pts: Vec<Point> = (0..n).map(|k| curve.eval(TAU * k as f64 / n as f64)).collect();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = pts[i].dist(pts[j]);
            }
        }
        Self { n, dist }
    }

    /// Error of the tuple `(0, idx…)`.
    fn error(&self, idx: &[usize], a: &[f64], buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        let mut prev = 0;
        for &i in idx {
            buf.push(self.dist[prev * self.n + i]);
            prev = i;
        }
        buf.push(self.dist[prev * self.n]);
        proportionality_error(buf, a)
    }

    fn is_ordered(&self, idx: &[usize]) -> bool {
        idx[0] > 0 && idx.windows(2).all(|w| w[0] < w[1]) && *idx.last().unwrap() < self.n
    }

    fn is_local_min(&self, idx: &[usize], e: f64, a: &[f64], buf: &mut Vec<f64>) -> bool {
        let m = idx.len();
        let mut nb = vec![0usize; m];
        for code in 0..3usize.pow(m as u32) {
            let mut c = code;
            let mut moved = false;
            let mut ok = true;
            for k in 0..m {
                let off = (c % 3) as i64 - 1;
                c /= 3;
                moved |= off != 0;
                let v = idx[k] as i64 + off;
                if v <= 0 {
                    ok = false;
                }
                nb[k] = v.max(0) as usize;
            }
            if !moved || !ok || !self.is_ordered(&nb) {
                continue;
            }
            if self.error(&nb, a, buf) < e {
                return false;
            }
        }
        true
    }

    fn harvest(&self, a: &[f64], threshold: f64) -> Vec<(Vec<usize>, f64)> {
        let free = a.len() - 1;
        (1..self.n)
            .into_par_iter()
            .flat_map_iter(|first| {
                let mut out = Vec::new();
                let mut idx = vec![0usize; free];
                let mut buf = Vec::with_capacity(a.len());
                idx[0] = first;
                self.descend(&mut idx, 1, a, threshold, &mut buf, &mut out);
                out
            })
            .collect()
    }

    fn descend(
        &self,
        idx: &mut Vec<usize>,
        depth: usize,
        a: &[f64],
        threshold: f64,
        buf: &mut Vec<f64>,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if depth == idx.len() {
            let e = self.error(idx, a, buf);
            if e < threshold && self.is_local_min(idx, e, a, buf) {
                out.push((idx.clone(), e));
            }
            return;
        }
        for i in idx[depth - 1] + 1..self.n {
            idx[depth] = i;
            self.descend(idx, depth + 1, a, threshold, buf, out);
        }
    }
}

fn full_sigma(inner: &[f64]) -> Vec<f64> {
    let mut s = Vec::with_capacity(inner.len() + 2);
    s.push(0.0);
    s.extend_from_slice(inner);
    s.push(TAU);
    s
}

fn refine(curve: &Curve, a: &[f64], start: &[f64], h: f64) -> (Vec<f64>, f64) {
    let m = start.len();
    let eval = |inner: &[f64]| -> f64 {
        let ordered = inner[0] > 0.0 && inner.windows(2).all(|w| w[0] < w[1]) && inner[m - 1] < TAU;
        if !ordered {
            return f64::INFINITY;
        }
        let mut s = vec![0.0];
        s.extend_from_slice(inner);
        proportionality_error(&chords_at(curve, &s), a)
    };
    let mut best = start.to_vec();
    let mut best_e = eval(&best);
    let width = (2 * REFINE_REACH + 1) as usize;
    let mut step = h;
    for _ in 0..REFINE_ROUNDS {
        step /= REFINE_FACTOR;
        let center = best.clone();
        let mut cand = vec![0.0; m];
        for code in 0..width.pow(m as u32) {
            let mut c = code;
            for k in 0..m {
                let off = (c % width) as i64 - REFINE_REACH;
                c /= width;
                cand[k] = center[k] + off as f64 * step;
            }
            let e = eval(&cand);
            if e < best_e {
                best_e = e;
                best.copy_from_slice(&cand);
            }
        }
    }
    (best, best_e)
}

/// All grid tuples whose chords are nearly proportional to `a`, refined.
///
/// Tuples `0 = σ₀ < σ₁ < … < σₙ₋₁` on the uniform `grid`-point α-grid with
/// proportionality error below `10/grid` that are local minima among their
/// `3ⁿ⁻¹ − 1` neighbours are refined by three rounds of local search, each
/// eight times finer than the last. Refined candidates closer than two grid
/// cells in every `σ` are merged.
pub fn grid_search(curve: &Curve, a: &EdgeLengths, grid: usize) -> Result<Vec<GridSolution>, OracleError> {
    let n = a.len();
    if n > MAX_SIDES {
        return Err(OracleError::TooManySides(n));
    }
    if grid < MIN_GRID {
        return Err(OracleError::GridTooSmall(grid));
    }
    let h = TAU / grid as f64;
    let table = Table::new(curve, grid);
    let minima = table.harvest(a.as_slice(), 10.0 / grid as f64);
    if minima.is_empty() {
        return Err(OracleError::GridTooCoarse(grid));
    }

    let refined: Vec<GridSolution> = minima
        .par_iter()
        .map(|(idx, coarse_error)| {
            let coarse: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
            let (inner, e) = refine(curve, a.as_slice(), &coarse, h);
            let sigma = full_sigma(&inner);
            let chords = chords_at(curve, &sigma[..n]);
            let mu = chords.iter().zip(a.as_slice()).map(|(c, a)| c * a).sum::<f64>()
                / chords.iter().map(|c| c * c).sum::<f64>();
            GridSolution {
                coarse_sigma: full_sigma(&coarse),
                coarse_error: *coarse_error,
                theta: sigma.windows(2).map(|w| w[1] - w[0]).collect(),
                sigma,
                mu,
                proportionality_error: e,
                grid,
            }
        })
        .collect();

    let mut out: Vec<GridSolution> = Vec::new();
    for cand in refined {
        let near = out.iter_mut().find(|s| {
            s.sigma.iter().zip(&cand.sigma).all(|(x, y)| (x - y).abs() < 2.0 * h)
        });
        match near {
            Some(s) if cand.proportionality_error < s.proportionality_error => *s = cand,
            Some(_) => {}
            None => out.push(cand),
        }
    }
    Ok(out)
}
