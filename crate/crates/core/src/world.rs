//! Kinematic world: drone state, landing pad and its platform motion, wind,
//! and the explicit-Euler step that advances everything.
//!
//! Frames: world is right-handed with `z` up. The body frame is `x` forward,
//! `y` left, `z` up, rotated from the world frame by `yaw` only. The approach
//! corridor lies along world `-x`: a drone facing the pad at `yaw = 0` flies
//! toward `+x`, and the landmark sits behind the pad at `+x`.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("command out of bounds: {0}")]
    CommandOutOfBounds(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Global simulation limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    /// Integration step, seconds.
    pub dt: f64,
    /// Maximum drone speed (also the per-component command bound), m/s.
    pub v_max: f64,
    /// Maximum descent speed that still counts as a landing, m/s.
    pub v_land_max: f64,
    /// Maximum wind speed, m/s.
    pub wind_max: f64,
    /// Maximum yaw rate, rad/s.
    pub yaw_rate_max: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            v_max: 3.0,
            v_land_max: 0.5,
            wind_max: 2.0,
            yaw_rate_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub yaw: f64,
    pub time: f64,
}

impl DroneState {
    pub fn at(position: Vector3<f64>) -> Self {
        Self {
            position,
            velocity: Vector3::zeros(),
            yaw: 0.0,
            time: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.yaw.is_finite()
            && self.time.is_finite()
    }
}

/// Velocity command in the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlCommand {
    pub v_cmd: Vector3<f64>,
    pub yaw_rate: f64,
    pub land: bool,
}

impl ControlCommand {
    pub fn new(vx: f64, vy: f64, vz: f64) -> Self {
        Self {
            v_cmd: Vector3::new(vx, vy, vz),
            yaw_rate: 0.0,
            land: false,
        }
    }

    pub fn hover() -> Self {
        Self::default()
    }

    /// No velocity, no yaw, no land request: the pilot is not touching the sticks.
    pub fn is_neutral(&self) -> bool {
        self.v_cmd == Vector3::zeros() && self.yaw_rate == 0.0 && !self.land
    }

    pub fn is_finite(&self) -> bool {
        self.v_cmd.iter().all(|v| v.is_finite()) && self.yaw_rate.is_finite()
    }

    pub fn validate(&self, cfg: &WorldConfig) -> Result<(), WorldError> {
        if !self.is_finite() {
            return Err(WorldError::NonFinite("command"));
        }
        if self.v_cmd.iter().any(|v| v.abs() > cfg.v_max) {
            return Err(WorldError::CommandOutOfBounds(format!(
                "velocity component exceeds {} m/s",
                cfg.v_max
            )));
        }
        if self.yaw_rate.abs() > cfg.yaw_rate_max {
            return Err(WorldError::CommandOutOfBounds(format!(
                "yaw rate exceeds {} rad/s",
                cfg.yaw_rate_max
            )));
        }
        Ok(())
    }

    /// Clamps every component into the command envelope.
    pub fn clamped(mut self, cfg: &WorldConfig) -> Self {
        for v in self.v_cmd.iter_mut() {
            *v = v.clamp(-cfg.v_max, cfg.v_max);
        }
        self.yaw_rate = self.yaw_rate.clamp(-cfg.yaw_rate_max, cfg.yaw_rate_max);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MotionPattern {
    Static,
    /// Constant-velocity translation along a horizontal `heading`.
    Linear { heading: Vector2<f64>, speed: f64 },
    /// Level rotation of the pad center about a vertical axis through `center`
    /// at `rate` rad/s (counter-clockwise seen from above).
    Rotational { center: Vector2<f64>, rate: f64 },
}

impl MotionPattern {
    pub fn validate(&self) -> Result<(), WorldError> {
        match *self {
            MotionPattern::Static => Ok(()),
            MotionPattern::Linear { heading, speed } => {
                if !(speed >= 0.0) || !speed.is_finite() {
                    return Err(WorldError::InvalidConfig("linear speed must be >= 0".into()));
                }
                if (heading.norm() - 1.0).abs() > 1e-9 {
                    return Err(WorldError::InvalidConfig("heading must be a unit vector".into()));
                }
                Ok(())
            }
            MotionPattern::Rotational { center, rate } => {
                if !(rate >= 0.0) || !rate.is_finite() || !center.iter().all(|c| c.is_finite()) {
                    return Err(WorldError::InvalidConfig("rotation rate must be >= 0".into()));
                }
                Ok(())
            }
        }
    }

    /// Magnitude of the pattern's speed: m/s for linear, rad/s for rotational.
    pub fn speed(&self) -> f64 {
        match *self {
            MotionPattern::Static => 0.0,
            MotionPattern::Linear { speed, .. } => speed,
            MotionPattern::Rotational { rate, .. } => rate,
        }
    }
}

/// Pad center at time `t` for a pad that starts at `start`.
pub fn platform_pose(pattern: &MotionPattern, start: Vector3<f64>, t: f64) -> Vector3<f64> {
    match *pattern {
        MotionPattern::Static => start,
        MotionPattern::Linear { heading, speed } => {
            let d = heading * (speed * t);
            Vector3::new(start.x + d.x, start.y + d.y, start.z)
        }
        MotionPattern::Rotational { center, rate } => {
            let (s, c) = (rate * t).sin_cos();
            let rx = start.x - center.x;
            let ry = start.y - center.y;
            Vector3::new(center.x + c * rx - s * ry, center.y + s * rx + c * ry, start.z)
        }
    }
}

/// Horizontal velocity of the pad center at time `t`.
pub fn platform_velocity(pattern: &MotionPattern, start: Vector3<f64>, t: f64) -> Vector3<f64> {
    match *pattern {
        MotionPattern::Static => Vector3::zeros(),
        MotionPattern::Linear { heading, speed } => Vector3::new(heading.x * speed, heading.y * speed, 0.0),
        MotionPattern::Rotational { center, rate } => {
            let p = platform_pose(pattern, start, t);
            Vector3::new(-rate * (p.y - center.y), rate * (p.x - center.x), 0.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PadConfig {
    /// Pad center at `t = 0`.
    pub center: Vector3<f64>,
    pub radius: f64,
    pub motion: MotionPattern,
}

impl Default for PadConfig {
    fn default() -> Self {
        Self {
            center: Vector3::zeros(),
            radius: 0.5,
            motion: MotionPattern::Static,
        }
    }
}

impl PadConfig {
    pub fn center_at(&self, t: f64) -> Vector3<f64> {
        platform_pose(&self.motion, self.center, t)
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        if !(self.radius > 0.0) {
            return Err(WorldError::InvalidConfig("pad radius must be > 0".into()));
        }
        self.motion.validate()
    }
}

/// Placement and appearance of the lenticular disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LandmarkConfig {
    /// Horizontal distance behind the pad center along the approach axis, m.
    pub offset_from_pad: f64,
    /// Height of the disc center above ground, m.
    pub height: f64,
    /// Tilt of the disc plane from vertical, radians; positive tips the
    /// normal upward toward an approaching drone.
    pub inclination: f64,
    pub diameter: f64,
    /// Viewing-angle edges (radians) separating color bands A|B|C.
    pub band_edges: [f64; 2],
}

impl Default for LandmarkConfig {
    fn default() -> Self {
        Self {
            offset_from_pad: 1.0,
            height: 0.5,
            inclination: 0.0,
            diameter: 0.5,
            band_edges: [12f64.to_radians(), 25f64.to_radians()],
        }
    }
}

impl LandmarkConfig {
    pub fn validate(&self) -> Result<(), WorldError> {
        if !(self.diameter > 0.0) || !(self.height > 0.0) {
            return Err(WorldError::InvalidConfig("landmark diameter and height must be > 0".into()));
        }
        let [a, b] = self.band_edges;
        if !(0.0 < a && a < b && b < PI / 2.0) {
            return Err(WorldError::InvalidConfig("band edges must satisfy 0 < e0 < e1 < pi/2".into()));
        }
        if !(self.inclination.abs() < PI / 2.0) {
            return Err(WorldError::InvalidConfig("inclination must be within (-pi/2, pi/2)".into()));
        }
        Ok(())
    }

    /// World position of the disc center given the pad center.
    pub fn center(&self, pad_center: Vector3<f64>) -> Vector3<f64> {
        Vector3::new(pad_center.x + self.offset_from_pad, pad_center.y, self.height)
    }

    /// Unit normal of the visible face (points back down the approach corridor).
    pub fn normal(&self) -> Vector3<f64> {
        let (s, c) = self.inclination.sin_cos();
        Vector3::new(-c, 0.0, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct WindState {
    /// Mean horizontal wind, m/s.
    pub velocity: Vector2<f64>,
    /// Gust amplitude along the mean wind direction, m/s.
    pub gust_amplitude: f64,
    /// Gust period, s. Ignored when zero.
    pub gust_period: f64,
}

impl WindState {
    pub fn calm() -> Self {
        Self::default()
    }

    pub fn steady(vx: f64, vy: f64) -> Self {
        Self {
            velocity: Vector2::new(vx, vy),
            ..Self::default()
        }
    }

    pub fn validate(&self, cfg: &WorldConfig) -> Result<(), WorldError> {
        if !self.velocity.iter().all(|v| v.is_finite()) {
            return Err(WorldError::NonFinite("wind"));
        }
        if self.velocity.norm() + self.gust_amplitude.abs() > cfg.wind_max + 1e-12 {
            return Err(WorldError::InvalidConfig(format!("wind exceeds {} m/s", cfg.wind_max)));
        }
        Ok(())
    }

    /// Additive horizontal drift at time `t`.
    pub fn drift(&self, t: f64) -> Vector3<f64> {
        let mut v = self.velocity;
        if self.gust_amplitude != 0.0 && self.gust_period > 0.0 {
            let dir = if v.norm() > 0.0 { v.normalize() } else { Vector2::new(1.0, 0.0) };
            v += dir * (self.gust_amplitude * (2.0 * PI * t / self.gust_period).sin());
        }
        Vector3::new(v.x, v.y, 0.0)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Rotates a body-frame vector into the world frame.
pub fn body_to_world(v: &Vector3<f64>, yaw: f64) -> Vector3<f64> {
    let (s, c) = yaw.sin_cos();
    Vector3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

pub fn world_to_body(v: &Vector3<f64>, yaw: f64) -> Vector3<f64> {
    body_to_world(v, -yaw)
}

/// One explicit-Euler step of the velocity-command model.
pub fn step(
    state: &DroneState,
    cmd: &ControlCommand,
    wind: &WindState,
    dt: f64,
    cfg: &WorldConfig,
) -> Result<DroneState, WorldError> {
    if !state.is_finite() {
        return Err(WorldError::NonFinite("state"));
    }
    if !dt.is_finite() {
        return Err(WorldError::NonFinite("dt"));
    }
    if dt <= 0.0 {
        return Err(WorldError::BadTimeStep(dt));
    }
    cmd.validate(cfg)?;

    let mut commanded = body_to_world(&cmd.v_cmd, state.yaw);
    let speed = commanded.norm();
    if speed > cfg.v_max {
        commanded *= cfg.v_max / speed;
    }
    let velocity = commanded + wind.drift(state.time);
    if !velocity.iter().all(|v| v.is_finite()) {
        return Err(WorldError::NonFinite("wind"));
    }
    let mut position = state.position + velocity * dt;
    if position.z < 0.0 {
        position.z = 0.0;
    }
    Ok(DroneState {
        position,
        velocity,
        yaw: normalize_angle(state.yaw + cmd.yaw_rate * dt),
        time: state.time + dt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TouchdownOutcome {
    Airborne,
    Landed { lateral_displacement: f64 },
    Crashed,
}

impl TouchdownOutcome {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, TouchdownOutcome::Airborne)
    }
}

/// Classifies the state after a step. `land_requested` is the land flag of
/// the command that produced `state`.
pub fn touchdown_outcome(
    state: &DroneState,
    land_requested: bool,
    pad: &PadConfig,
    cfg: &WorldConfig,
) -> TouchdownOutcome {
    if state.position.z > 0.0 {
        return TouchdownOutcome::Airborne;
    }
    let descent_speed = (-state.velocity.z).max(0.0);
    if land_requested && descent_speed <= cfg.v_land_max {
        let c = pad.center_at(state.time);
        let lateral = ((state.position.x - c.x).powi(2) + (state.position.y - c.y).powi(2)).sqrt();
        TouchdownOutcome::Landed {
            lateral_displacement: lateral,
        }
    } else {
        TouchdownOutcome::Crashed
    }
}
