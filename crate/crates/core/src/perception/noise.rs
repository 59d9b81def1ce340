use crate::optics::{color_band, LandmarkObservation, LandmarkView, Occlusion};
use crate::world::LandmarkConfig;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Measurement noise applied to synthesized observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub sigma_diameter_px: f64,
    pub sigma_angle: f64,
    pub sigma_centroid_px: f64,
    pub dropout_prob: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            sigma_diameter_px: 0.0,
            sigma_angle: 0.0,
            sigma_centroid_px: 0.0,
            dropout_prob: 0.0,
            seed: 0,
        }
    }

    /// Moderate sensor noise used by the experiment scenarios.
    pub fn nominal() -> Self {
        Self {
            sigma_diameter_px: 0.5,
            sigma_angle: 0.005,
            sigma_centroid_px: 0.5,
            dropout_prob: 0.02,
            seed: 0,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.sigma_diameter_px >= 0.0
            && self.sigma_angle >= 0.0
            && self.sigma_centroid_px >= 0.0
            && (0.0..=1.0).contains(&self.dropout_prob)
    }
}

/// Perturbs a visible observation. Invisible observations pass through
/// unchanged and consume no randomness.
pub fn corrupt<R: Rng + ?Sized>(
    obs: &LandmarkObservation,
    nm: &NoiseModel,
    lm: &LandmarkConfig,
    rng: &mut R,
) -> LandmarkObservation {
    let Some(view) = obs.view else {
        return *obs;
    };
    let drop: f64 = rng.random();
    let n: [f64; 4] = [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ];
    if drop < nm.dropout_prob {
        return LandmarkObservation::hidden(Occlusion::Dropout);
    }
    let diameter = (view.apparent_diameter_px + nm.sigma_diameter_px * n[0]).max(1e-6);
    let angle = (view.viewing_angle + nm.sigma_angle * n[1]).abs().min(FRAC_PI_2 - 1e-9);
    let angle = if nm.sigma_angle == 0.0 { view.viewing_angle } else { angle };
    let centroid = view.centroid_px + nalgebra::Vector2::new(n[2], n[3]) * nm.sigma_centroid_px;
    LandmarkObservation::visible(LandmarkView {
        apparent_diameter_px: diameter,
        viewing_angle: angle,
        color_band: color_band(angle, lm).unwrap_or(view.color_band),
        ellipse_ratio: if nm.sigma_angle == 0.0 { view.ellipse_ratio } else { angle.cos() },
        centroid_px: centroid,
    })
}
