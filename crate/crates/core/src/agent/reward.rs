//! Shaped reward for the landing task.

use crate::episode::EpisodeStatus;
use crate::perception::PositionEstimate;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardSpec {
    /// Reward per meter of estimated approach progress.
    pub w_progress: f64,
    /// Reward added every step (negative).
    pub w_time: f64,
    /// Landing bonus at zero displacement.
    pub land_bonus: f64,
    /// Length scale of the landing bonus decay, meters.
    pub land_scale: f64,
    pub r_crash: f64,
    pub r_oob: f64,
    /// Terminal penalty for a touchdown outside the pad radius.
    pub r_miss: f64,
}

impl Default for RewardSpec {
    fn default() -> Self {
        Self {
            w_progress: 1.0,
            w_time: -0.01,
            land_bonus: 100.0,
            land_scale: 0.1,
            r_crash: -100.0,
            r_oob: -50.0,
            r_miss: -100.0,
        }
    }
}

/// Remaining approach distance: horizontal range plus altitude.
pub fn approach_distance(e: &PositionEstimate) -> f64 {
    e.depth.hypot(e.lateral_offset) + e.altitude
}

impl RewardSpec {
    pub fn is_valid(&self) -> bool {
        self.r_crash < 0.0 && self.land_bonus > 0.0 && self.land_scale > 0.0 && self.r_oob <= 0.0 && self.r_miss <= 0.0
    }

    /// Terminal bonus for a landing with the given displacement.
    pub fn landing_bonus(&self, lateral_displacement: f64) -> f64 {
        self.land_bonus * (-lateral_displacement / self.land_scale).exp()
    }

    /// Largest terminal reward, used to bound the value function.
    pub fn max_terminal(&self) -> f64 {
        self.land_bonus
    }
}

/// Reward for one transition. Progress is measured on the estimates, so an
/// episode without an estimate on either side earns only the time term.
pub fn reward(
    prev: Option<&PositionEstimate>,
    next: Option<&PositionEstimate>,
    status: &EpisodeStatus,
    spec: &RewardSpec,
    pad_radius: f64,
) -> f64 {
    let progress = match (prev, next) {
        (Some(p), Some(n)) => approach_distance(p) - approach_distance(n),
        _ => 0.0,
    };
    let terminal = match *status {
        EpisodeStatus::Landed { lateral_displacement } if lateral_displacement > pad_radius => spec.r_miss,
        EpisodeStatus::Landed { lateral_displacement } => spec.landing_bonus(lateral_displacement),
        EpisodeStatus::Crashed => spec.r_crash,
        EpisodeStatus::OutOfBounds => spec.r_oob,
        EpisodeStatus::Running | EpisodeStatus::TimedOut => 0.0,
    };
    spec.w_progress * progress + spec.w_time + terminal
}
