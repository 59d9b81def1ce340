//! Self-supervised pilot intent: a per-axis autoregressive predictor of the
//! next command, trained on the pilot's own command logs.

use super::SharedError;
use crate::world::{ControlCommand, WorldConfig};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub const DEFAULT_ORDER: usize = 10;
pub const MIN_STEPS: usize = 200;
/// Fraction of regression rows held out to score the fit.
pub const HOLDOUT_FRACTION: f64 = 0.2;
/// Smoothing factor of the held-out error average.
pub const EMA_BETA: f64 = 0.1;

/// Axes predicted: vx, vy, vz, yaw_rate.
pub const AXES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentModel {
    pub order: usize,
    /// Per axis: `order` lag coefficients (most recent first) then a bias.
    pub coefficients: Vec<Vec<f64>>,
    pub trained: bool,
    /// Exponential moving average of the one-step prediction error norm
    /// over the held-out tail.
    pub error_ema: f64,
}

fn axis(c: &ControlCommand, k: usize) -> f64 {
    match k {
        0..=2 => c.v_cmd[k],
        _ => c.yaw_rate,
    }
}

impl IntentModel {
    pub fn untrained(order: usize) -> Self {
        Self {
            order,
            coefficients: vec![vec![0.0; order + 1]; AXES],
            trained: false,
            error_ema: f64::INFINITY,
        }
    }

    /// Predicts the command following `history` (oldest first). Histories
    /// shorter than the model order repeat their first command backwards.
    /// Untrained models, or empty histories, predict the last command or
    /// neutral.
    pub fn predict(&self, history: &[ControlCommand], cfg: &WorldConfig) -> ControlCommand {
        let Some(last) = history.last() else {
            return ControlCommand::hover();
        };
        if !self.trained {
            return *last;
        }
        let n = history.len();
        let lag = |i: usize| &history[n - 1 - i.min(n - 1)];
        let mut out = [0.0; AXES];
        for (k, o) in out.iter_mut().enumerate() {
            let c = &self.coefficients[k];
            let mut v = c[self.order];
            for i in 0..self.order {
                v += c[i] * axis(lag(i), k);
            }
            *o = v;
        }
        ControlCommand {
            v_cmd: nalgebra::Vector3::new(out[0], out[1], out[2]),
            yaw_rate: out[3],
            land: last.land,
        }
        .clamped(cfg)
    }
}

fn rows(histories: &[Vec<ControlCommand>], order: usize, k: usize) -> Vec<(Vec<f64>, f64)> {
    let mut out = Vec::new();
    for h in histories {
        for t in order..h.len() {
            let mut x: Vec<f64> = (0..order).map(|i| axis(&h[t - 1 - i], k)).collect();
            x.push(1.0);
            out.push((x, axis(&h[t], k)));
        }
    }
    out
}

/// Relative ridge added to the normal equations; keeps collinear lags
/// (constant or periodic command streams) well posed.
const RIDGE: f64 = 1e-10;

fn solve(rows: &[(Vec<f64>, f64)], order: usize) -> Result<Vec<f64>, SharedError> {
    let p = order + 1;
    let a = DMatrix::from_fn(rows.len(), p, |i, j| rows[i].0[j]);
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let mut n = a.transpose() * &a;
    let lambda = RIDGE * n.trace().max(1.0) / p as f64;
    for i in 0..p {
        n[(i, i)] += lambda;
    }
    let x = n
        .cholesky()
        .ok_or(SharedError::DegenerateFit("normal equations not positive definite".into()))?
        .solve(&(a.transpose() * b));
    Ok(x.iter().copied().collect())
}

/// Least-squares AR fit per axis on the leading rows; the trailing
/// [`HOLDOUT_FRACTION`] of rows scores the model.
pub fn fit_intent(histories: &[Vec<ControlCommand>], order: usize) -> Result<IntentModel, SharedError> {
    let steps: usize = histories.iter().map(|h| h.len()).sum();
    if steps < MIN_STEPS {
        return Err(SharedError::InsufficientData(format!(
            "{steps} command steps, need at least {MIN_STEPS}"
        )));
    }
    if order == 0 {
        return Err(SharedError::InsufficientData("order must be >= 1".into()));
    }
    let n_rows = rows(histories, order, 0).len();
    if n_rows < 2 * (order + 1) {
        return Err(SharedError::InsufficientData(format!(
            "sequences too short for order {order}"
        )));
    }
    let n_fit = ((1.0 - HOLDOUT_FRACTION) * n_rows as f64).round() as usize;
    let n_fit = n_fit.clamp(order + 1, n_rows - 1);

    let mut model = IntentModel::untrained(order);
    let mut residuals = vec![[0.0; AXES]; n_rows - n_fit];
    for k in 0..AXES {
        let r = rows(histories, order, k);
        let coef = solve(&r[..n_fit], order)?;
        for (j, (x, y)) in r[n_fit..].iter().enumerate() {
            let pred: f64 = x.iter().zip(&coef).map(|(a, b)| a * b).sum();
            residuals[j][k] = pred - y;
        }
        model.coefficients[k] = coef;
    }
    let mut ema = 0.0;
    for (j, r) in residuals.iter().enumerate() {
        let e = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        ema = if j == 0 { e } else { EMA_BETA * e + (1.0 - EMA_BETA) * ema };
    }
    model.error_ema = ema;
    model.trained = true;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmd(vx: f64) -> ControlCommand {
        ControlCommand::new(vx, 0.0, 0.0)
    }

    #[test]
    fn constant_history_is_reproduced() {
        let h = vec![vec![ControlCommand::new(0.7, -0.2, 0.1); 300]];
        let m = fit_intent(&h, DEFAULT_ORDER).unwrap();
        assert!(m.error_ema < 1e-9, "{}", m.error_ema);
        let p = m.predict(&h[0], &WorldConfig::default());
        assert!((p.v_cmd - h[0][0].v_cmd).norm() < 1e-9);
    }

    #[test]
    fn sinusoid_one_step_error_is_small() {
        // A sampled sinusoid satisfies x[t] = 2 cos(w) x[t-1] - x[t-2]
        // exactly, so an order-10 fit has an exact solution.
        let w = 2.0 * std::f64::consts::PI / 40.0;
        let amp = 1.5;
        let h: Vec<_> = (0..400).map(|t| cmd(amp * (w * t as f64).sin())).collect();
        let m = fit_intent(&[h.clone()], DEFAULT_ORDER).unwrap();
        let cfg = WorldConfig::default();
        let mut worst: f64 = 0.0;
        for t in 300..399 {
            let p = m.predict(&h[..=t], &cfg);
            worst = worst.max((p.v_cmd.x - h[t + 1].v_cmd.x).abs());
        }
        assert!(worst <= 0.05 * amp, "worst one-step error {worst}");
        assert!(m.error_ema <= 0.05 * amp);
        // Oracle check on the AR(2) identity itself.
        let c = 2.0 * w.cos();
        assert!((c * h[5].v_cmd.x - h[4].v_cmd.x - h[6].v_cmd.x).abs() < 1e-12);
    }

    #[test]
    fn short_history_is_insufficient() {
        let h = vec![vec![cmd(1.0); 10]];
        assert!(matches!(fit_intent(&h, DEFAULT_ORDER), Err(SharedError::InsufficientData(_))));
    }

    #[test]
    fn untrained_predicts_last() {
        let m = IntentModel::untrained(10);
        let h = vec![cmd(0.1), cmd(0.4)];
        assert_eq!(m.predict(&h, &WorldConfig::default()), cmd(0.4));
        assert!(m.predict(&[], &WorldConfig::default()).is_neutral());
    }
}
