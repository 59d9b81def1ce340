//! Scripted human-pilot models. Unlike the co-pilot, pilots see the true
//! drone and pad positions and the wind.

use crate::world::{world_to_body, ControlCommand, DroneState, WindState, WorldConfig};
use nalgebra::{Vector2, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PilotKind {
    Ideal,
    /// Ideal plus independent Gaussian noise on each velocity component.
    Noisy { sigma: f64 },
    /// Ideal plus a feedforward that cancels the wind drift.
    WindCompensating,
    /// Ideal plus a constant sideways velocity bias (body `y`).
    AdversarialDrift { bias: f64 },
    Idle,
}

/// Proportional guidance parameters shared by all non-idle pilots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PilotGains {
    /// Horizontal velocity per meter of position error, 1/s.
    pub kp: f64,
    pub max_horizontal_speed: f64,
    /// Vertical velocity per meter of altitude error, 1/s.
    pub kz: f64,
    pub max_vertical_speed: f64,
    /// Glide slope: target altitude per meter of horizontal distance.
    pub glide_slope: f64,
    /// Altitude the glide slope bottoms out at, meters.
    pub floor_altitude: f64,
    /// Horizontal error under which the pilot commits to landing, meters.
    pub land_radius: f64,
    pub land_descent: f64,
}

impl Default for PilotGains {
    fn default() -> Self {
        Self {
            kp: 1.2,
            max_horizontal_speed: 2.0,
            kz: 1.0,
            max_vertical_speed: 1.0,
            glide_slope: 0.3,
            floor_altitude: 0.5,
            land_radius: 0.1,
            land_descent: 0.4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotModel {
    pub kind: PilotKind,
    pub gains: PilotGains,
    /// Preferred approach bearing, degrees: far from the pad the pilot
    /// first lines up on this bearing before closing in.
    pub preferred_bearing_deg: Option<f64>,
}

impl PilotModel {
    pub fn new(kind: PilotKind) -> Self {
        Self {
            kind,
            gains: PilotGains::default(),
            preferred_bearing_deg: None,
        }
    }

    pub fn is_valid(&self) -> bool {
        let g = &self.gains;
        let kind_ok = match self.kind {
            PilotKind::Noisy { sigma } => sigma >= 0.0 && sigma.is_finite(),
            PilotKind::AdversarialDrift { bias } => bias.is_finite(),
            _ => true,
        };
        kind_ok && g.kp > 0.0 && g.kz > 0.0 && g.max_horizontal_speed > 0.0 && g.land_descent > 0.0
    }
}

/// What a pilot perceives at one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotView {
    pub drone: DroneState,
    pub pad_center: Vector3<f64>,
    pub pad_velocity: Vector3<f64>,
    pub wind: WindState,
}

fn clamp_norm(v: Vector2<f64>, max: f64) -> Vector2<f64> {
    let n = v.norm();
    if n > max {
        v * (max / n)
    } else {
        v
    }
}

fn ideal(view: &PilotView, g: &PilotGains, preferred_bearing_deg: Option<f64>) -> ControlCommand {
    let p = view.drone.position;
    let c = view.pad_center;
    let err = Vector2::new(c.x - p.x, c.y - p.y);
    let dist = err.norm();

    let mut aim = err;
    if let Some(b) = preferred_bearing_deg {
        // Line up on the preferred approach line 2 m short of the pad first.
        let b = b.to_radians();
        let gate = Vector2::new(c.x - 2.0 * b.cos(), c.y + 2.0 * b.sin());
        let to_gate = gate - Vector2::new(p.x, p.y);
        if dist > 3.0 && to_gate.norm() > 0.5 {
            aim = to_gate;
        }
    }
    let v_h = clamp_norm(
        aim * g.kp + Vector2::new(view.pad_velocity.x, view.pad_velocity.y),
        g.max_horizontal_speed,
    );

    let landing = dist < g.land_radius && p.z <= g.floor_altitude + 0.1;
    let vz = if landing {
        -g.land_descent
    } else {
        let target = (g.floor_altitude + g.glide_slope * dist).min(p.z.max(g.floor_altitude));
        (g.kz * (target - p.z)).clamp(-g.max_vertical_speed, g.max_vertical_speed)
    };
    let body = world_to_body(&Vector3::new(v_h.x, v_h.y, vz), view.drone.yaw);
    ControlCommand {
        v_cmd: body,
        yaw_rate: 0.0,
        land: landing,
    }
}

/// One pilot command. Outputs are clamped into the command envelope.
pub fn pilot_command<R: Rng + ?Sized>(
    model: &PilotModel,
    view: &PilotView,
    t: f64,
    cfg: &WorldConfig,
    rng: &mut R,
) -> ControlCommand {
    let mut cmd = match model.kind {
        PilotKind::Idle => return ControlCommand::hover(),
        _ => ideal(view, &model.gains, model.preferred_bearing_deg),
    };
    match model.kind {
        PilotKind::Noisy { sigma } => {
            for k in 0..3 {
                let n: f64 = rng.sample(StandardNormal);
                cmd.v_cmd[k] += sigma * n;
            }
        }
        PilotKind::WindCompensating => {
            let drift = view.wind.drift(t);
            cmd.v_cmd -= world_to_body(&drift, view.drone.yaw);
        }
        PilotKind::AdversarialDrift { bias } => cmd.v_cmd.y += bias,
        PilotKind::Ideal | PilotKind::Idle => {}
    }
    cmd.clamped(cfg)
}
