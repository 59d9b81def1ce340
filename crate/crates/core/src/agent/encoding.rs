//! Discretization of the perceived state into a tabular index.

use crate::optics::ColorBand;
use crate::perception::PositionEstimate;
use serde::{Deserialize, Serialize};

/// Interior bin edges per dimension. A dimension with `k` edges has `k + 1`
/// bins; values below the first edge fall in bin 0, values at or above the
/// last edge in the top bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BinScheme {
    pub altitude: Vec<f64>,
    pub depth: Vec<f64>,
    pub lateral: Vec<f64>,
    pub confidence: Vec<f64>,
}

impl Default for BinScheme {
    /// 8 altitude bins over [0, 10] m, 10 depth bins over [0, 20] m (plus
    /// an overshoot bin for negative depth), 7 signed lateral bins over
    /// [-5, 5] m and 2 confidence bins. Bins are finest near the pad.
    fn default() -> Self {
        Self {
            altitude: vec![0.1, 0.3, 0.6, 1.0, 1.6, 2.5, 4.0],
            depth: vec![-0.05, 0.05, 0.15, 0.4, 1.0, 2.0, 4.0, 7.0, 12.0],
            lateral: vec![-1.0, -0.25, -0.05, 0.05, 0.25, 1.0],
            confidence: vec![0.5],
        }
    }
}

/// Index into the Q table. The last index is the shared terminal state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EncodedState(pub usize);

fn bin(edges: &[f64], x: f64) -> usize {
    // NaN lands in bin 0.
    edges.partition_point(|&e| e <= x)
}

impl BinScheme {
    fn dims(&self) -> [usize; 5] {
        [
            self.altitude.len() + 1,
            self.depth.len() + 1,
            self.lateral.len() + 1,
            self.confidence.len() + 1,
            3,
        ]
    }

    /// Number of non-terminal states.
    pub fn live_states(&self) -> usize {
        self.dims().iter().product()
    }

    /// Total state count including the terminal state.
    pub fn num_states(&self) -> usize {
        self.live_states() + 1
    }

    pub fn terminal(&self) -> EncodedState {
        EncodedState(self.live_states())
    }

    pub fn is_valid(&self) -> bool {
        [&self.altitude, &self.depth, &self.lateral, &self.confidence]
            .iter()
            .all(|e| e.iter().all(|v| v.is_finite()) && e.windows(2).all(|w| w[0] < w[1]))
    }

    pub fn encode(&self, est: &PositionEstimate, color: ColorBand) -> EncodedState {
        let d = self.dims();
        let idx = [
            bin(&self.altitude, est.altitude),
            bin(&self.depth, est.depth),
            bin(&self.lateral, est.lateral_offset),
            bin(&self.confidence, est.confidence),
            color.index(),
        ];
        let mut s = 0;
        for k in 0..5 {
            s = s * d[k] + idx[k];
        }
        EncodedState(s)
    }

    /// Inverse of [`encode`](Self::encode) for live states:
    /// (altitude, depth, lateral, confidence, color) bin indices.
    pub fn decode(&self, s: EncodedState) -> Option<[usize; 5]> {
        if s.0 >= self.live_states() {
            return None;
        }
        let d = self.dims();
        let mut out = [0; 5];
        let mut r = s.0;
        for k in (0..5).rev() {
            out[k] = r % d[k];
            r /= d[k];
        }
        Some(out)
    }
}

pub fn encode(est: &PositionEstimate, color: ColorBand) -> EncodedState {
    BinScheme::default().encode(est, color)
}
