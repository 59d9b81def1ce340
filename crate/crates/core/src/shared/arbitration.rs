//! Conflict measurement and human/AI command blending.

use crate::world::{ControlCommand, WorldConfig};
use serde::{Deserialize, Serialize};

pub const DEFAULT_ALPHA_MAX: f64 = 0.6;
/// Conflict below which the co-pilot may set the land flag.
pub const LAND_CONFLICT_LIMIT: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlendedCommand {
    pub command: ControlCommand,
    /// Weight actually given to the AI command.
    pub alpha: f64,
    pub conflict: f64,
}

/// Disagreement between pilot and co-pilot velocity commands in [0, 1].
///
/// Zero when either vector is zero. Otherwise `(1 - cos)/2`, raised to 1
/// when the co-pilot opposes both the pilot (`cos < 0`) and the pilot's
/// predicted next command.
pub fn conflict(human: &ControlCommand, ai: &ControlCommand, predicted: Option<&ControlCommand>) -> f64 {
    let h = human.v_cmd;
    let a = ai.v_cmd;
    let (nh, na) = (h.norm(), a.norm());
    if nh == 0.0 || na == 0.0 {
        return 0.0;
    }
    let cos = (h.dot(&a) / (nh * na)).clamp(-1.0, 1.0);
    let base = (1.0 - cos) / 2.0;
    match predicted {
        Some(p) if cos < 0.0 && a.dot(&p.v_cmd) < 0.0 => 1.0,
        _ => base,
    }
}

/// `alpha = alpha_max (1 - conflict)`; velocity and yaw rate are the convex
/// combination `alpha ai + (1 - alpha) human`, then clamped.
pub fn blend(
    human: &ControlCommand,
    ai: &ControlCommand,
    conflict: f64,
    alpha_max: f64,
    cfg: &WorldConfig,
) -> BlendedCommand {
    let conflict = conflict.clamp(0.0, 1.0);
    let alpha = (alpha_max.clamp(0.0, 1.0) * (1.0 - conflict)).clamp(0.0, 1.0);
    let command = ControlCommand {
        v_cmd: ai.v_cmd * alpha + human.v_cmd * (1.0 - alpha),
        yaw_rate: alpha * ai.yaw_rate + (1.0 - alpha) * human.yaw_rate,
        land: human.land || (ai.land && conflict < LAND_CONFLICT_LIMIT),
    }
    .clamped(cfg);
    BlendedCommand {
        command,
        alpha,
        conflict,
    }
}

/// Full arbitration step. A pilot who is not touching the controls (a
/// neutral command) hands the vehicle to the co-pilot unchanged, unless AI
/// authority is switched off with `alpha_max = 0`.
pub fn arbitrate(
    human: &ControlCommand,
    ai: &ControlCommand,
    predicted: Option<&ControlCommand>,
    alpha_max: f64,
    conflict_override: Option<f64>,
    cfg: &WorldConfig,
) -> BlendedCommand {
    let c = conflict_override.unwrap_or_else(|| conflict(human, ai, predicted));
    if human.is_neutral() && alpha_max > 0.0 && conflict_override.is_none() {
        return BlendedCommand {
            command: *ai,
            alpha: 1.0,
            conflict: c,
        };
    }
    blend(human, ai, c, alpha_max, cfg)
}
