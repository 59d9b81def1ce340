//! Piecewise-bilinear lookup tables fitted by regularized least squares.
//!
//! Each axis maps its raw input through a fixed warp (identity, reciprocal,
//! cosine or sine) and places knots uniformly in the warped coordinate.
//! The warp is chosen per input so that the target is close to linear in
//! the warped coordinate; knots then only have to absorb the residual shape.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Warp {
    Identity,
    Reciprocal,
    Cosine,
    Sine,
}

impl Warp {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Warp::Identity => x,
            Warp::Reciprocal => 1.0 / x,
            Warp::Cosine => x.cos(),
            Warp::Sine => x.sin(),
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Warp::Identity => 0,
            Warp::Reciprocal => 1,
            Warp::Cosine => 2,
            Warp::Sine => 3,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            0 => Warp::Identity,
            1 => Warp::Reciprocal,
            2 => Warp::Cosine,
            3 => Warp::Sine,
            _ => return None,
        })
    }
}

/// Uniform knot grid over a warped coordinate range `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnotAxis {
    pub warp: Warp,
    pub lo: f64,
    pub hi: f64,
    pub knots: usize,
}

impl KnotAxis {
    /// Axis spanning the warped values of `xs`.
    pub fn spanning(warp: Warp, knots: usize, xs: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = xs
            .map(|x| warp.apply(x))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
        // A flat axis still needs a non-empty cell.
        let pad = if hi - lo < 1e-12 { 1e-6 } else { 0.0 };
        Self {
            warp,
            lo: lo - pad,
            hi: hi + pad,
            knots,
        }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.knots - 1) as f64
    }

    pub fn cells(&self) -> usize {
        self.knots - 1
    }

    /// Cell index, fractional position inside it, and whether the query was
    /// outside the axis range (and got clamped).
    pub fn locate(&self, x: f64) -> (usize, f64, bool) {
        let s = self.warp.apply(x);
        let outside = !(s >= self.lo && s <= self.hi);
        let s = if s.is_nan() { self.lo } else { s.clamp(self.lo, self.hi) };
        let f = (s - self.lo) / self.step();
        let cell = (f.floor() as usize).min(self.cells() - 1);
        (cell, f - cell as f64, outside)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearTable {
    pub axes: [KnotAxis; 2],
    /// Row-major values at the knots, `axes[0]` is the slow index.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableFit {
    pub rms: f64,
    /// Cells with no training samples; their values come from the smoothness prior.
    pub empty_cells: usize,
}

impl BilinearTable {
    fn weights(&self, x0: f64, x1: f64) -> ([usize; 4], [f64; 4], bool) {
        let (c0, t0, o0) = self.axes[0].locate(x0);
        let (c1, t1, o1) = self.axes[1].locate(x1);
        let n1 = self.axes[1].knots;
        let idx = [c0 * n1 + c1, c0 * n1 + c1 + 1, (c0 + 1) * n1 + c1, (c0 + 1) * n1 + c1 + 1];
        let w = [(1.0 - t0) * (1.0 - t1), (1.0 - t0) * t1, t0 * (1.0 - t1), t0 * t1];
        (idx, w, o0 || o1)
    }

    /// Value at `(x0, x1)` and whether the query was outside the fitted hull.
    pub fn eval(&self, x0: f64, x1: f64) -> (f64, bool) {
        let (idx, w, outside) = self.weights(x0, x1);
        let v = idx.iter().zip(w.iter()).map(|(&i, &w)| self.values[i] * w).sum();
        (v, outside)
    }

    /// Least-squares fit of knot values to `(x0, x1, y)` samples with a small
    /// second-difference penalty that fills cells without data. Returns
    /// `None` when the regularized normal equations are not positive definite.
    pub fn fit(axes: [KnotAxis; 2], samples: &[(f64, f64, f64)], smoothing: f64) -> Option<(Self, TableFit)> {
        let (n0, n1) = (axes[0].knots, axes[1].knots);
        let n = n0 * n1;
        let mut table = Self {
            axes,
            values: vec![0.0; n],
        };
        let mut ata = DMatrix::<f64>::zeros(n, n);
        let mut atb = DVector::<f64>::zeros(n);
        let mut occupancy = vec![0usize; axes[0].cells() * axes[1].cells()];
        for &(x0, x1, y) in samples {
            let (idx, w, _) = table.weights(x0, x1);
            for a in 0..4 {
                atb[idx[a]] += w[a] * y;
                for b in 0..4 {
                    ata[(idx[a], idx[b])] += w[a] * w[b];
                }
            }
            let (c0, _, _) = axes[0].locate(x0);
            let (c1, _, _) = axes[1].locate(x1);
            occupancy[c0 * axes[1].cells() + c1] += 1;
        }

        // Second differences along both axes; zero for any bilinear surface.
        let lambda = smoothing * (samples.len() as f64 / n as f64).max(1.0);
        let mut add_stencil = |ids: [usize; 3]| {
            let coef = [1.0, -2.0, 1.0];
            for a in 0..3 {
                for b in 0..3 {
                    ata[(ids[a], ids[b])] += lambda * coef[a] * coef[b];
                }
            }
        };
        for i in 0..n0 {
            for j in 1..n1 - 1 {
                add_stencil([i * n1 + j - 1, i * n1 + j, i * n1 + j + 1]);
            }
        }
        for i in 1..n0 - 1 {
            for j in 0..n1 {
                add_stencil([(i - 1) * n1 + j, i * n1 + j, (i + 1) * n1 + j]);
            }
        }
        let ridge = 1e-10 * (samples.len() as f64).max(1.0) / n as f64;
        for k in 0..n {
            ata[(k, k)] += ridge;
        }

        let chol = ata.cholesky()?;
        let x = chol.solve(&atb);
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
        table.values = x.iter().copied().collect();

        let sse: f64 = samples.iter().map(|&(a, b, y)| (table.eval(a, b).0 - y).powi(2)).sum();
        let rms = (sse / samples.len().max(1) as f64).sqrt();
        let empty_cells = occupancy.iter().filter(|&&c| c == 0).count();
        Some((table, TableFit { rms, empty_cells }))
    }
}
