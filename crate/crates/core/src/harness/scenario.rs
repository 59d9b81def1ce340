//! Experiment scenarios: the static distance/angle grid and the moving-pad set.

use super::HarnessError;
use crate::agent::start_state;
use crate::episode::{Bounds, EpisodeSetup, DEFAULT_MAX_STEPS};
use crate::perception::NoiseModel;
use crate::scene::Scene;
use crate::world::{MotionPattern, WindState};
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub id: u32,
    /// Horizontal distance from the drone to the pad center at start, meters.
    pub start_depth: f64,
    /// Bearing off the approach axis, degrees; positive is to the left.
    pub start_bearing: f64,
    pub start_altitude: f64,
    pub pad_motion: MotionPattern,
    pub wind: WindState,
    pub noise: NoiseModel,
    pub seed: u64,
}

pub const STATIC_START_ALTITUDE: f64 = 2.5;
pub const DYNAMIC_START_DISTANCE: f64 = 8.0;
/// Distance from the rotating platform's center to the pad, meters.
pub const ROTATION_RADIUS: f64 = 3.0;

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.start_depth > 0.0) {
            return Err(HarnessError::InvalidScenario(format!("case {}: start_depth must be > 0", self.id)));
        }
        if !(-90.0..=90.0).contains(&self.start_bearing) {
            return Err(HarnessError::InvalidScenario(format!(
                "case {}: bearing must be within [-90, 90] degrees",
                self.id
            )));
        }
        if !(self.start_altitude > 0.0) {
            return Err(HarnessError::InvalidScenario(format!("case {}: start_altitude must be > 0", self.id)));
        }
        if !self.noise.is_valid() {
            return Err(HarnessError::InvalidScenario(format!("case {}: invalid noise model", self.id)));
        }
        self.pad_motion
            .validate()
            .map_err(|e| HarnessError::InvalidScenario(format!("case {}: {e}", self.id)))
    }

    pub fn is_dynamic(&self) -> bool {
        !matches!(self.pad_motion, MotionPattern::Static)
    }

    /// Episode setup for one repeat of this scenario.
    pub fn setup(&self, scene: &Scene, seed: u64) -> Result<EpisodeSetup, HarnessError> {
        self.validate()?;
        let mut scene = *scene;
        scene.pad.motion = self.pad_motion;
        self.wind
            .validate(&scene.world)
            .map_err(|e| HarnessError::InvalidScenario(e.to_string()))?;
        Ok(EpisodeSetup {
            scene,
            wind: self.wind,
            noise: self.noise,
            bounds: Bounds::default(),
            max_steps: DEFAULT_MAX_STEPS,
            start: start_state(scene.pad.center, self.start_depth, self.start_bearing, self.start_altitude),
            seed,
        })
    }

    /// Seed of repeat `r`.
    pub fn repeat_seed(&self, r: usize) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add(r as u64)
    }
}

fn static_case(id: u32, distance: f64, angle: f64) -> ScenarioConfig {
    ScenarioConfig {
        id,
        start_depth: distance,
        start_bearing: angle,
        start_altitude: STATIC_START_ALTITUDE,
        pad_motion: MotionPattern::Static,
        wind: WindState::calm(),
        noise: NoiseModel::nominal(),
        seed: 1000 + id as u64,
    }
}

/// The five named static cases followed by the full 3x3 distance/angle grid.
pub fn scenario1_grid() -> Vec<ScenarioConfig> {
    let named = [(5.0, 0.0), (10.0, 15.0), (15.0, 30.0), (5.0, 30.0), (10.0, 0.0)];
    let mut out: Vec<_> = named
        .iter()
        .enumerate()
        .map(|(i, &(d, a))| static_case(i as u32 + 1, d, a))
        .collect();
    for d in [5.0, 10.0, 15.0] {
        for a in [0.0, 15.0, 30.0] {
            out.push(static_case(out.len() as u32 + 1, d, a));
        }
    }
    out
}

/// Platform motions of the dynamic set, in table order.
pub fn dynamic_motions() -> Vec<MotionPattern> {
    let linear = |speed| MotionPattern::Linear {
        heading: Vector2::new(1.0, 0.0),
        speed,
    };
    let rotational = |deg_per_s: f64| MotionPattern::Rotational {
        center: Vector2::new(0.0, ROTATION_RADIUS),
        rate: deg_per_s.to_radians(),
    };
    vec![linear(0.5), linear(1.0), rotational(5.0), rotational(10.0), linear(1.5)]
}

/// Linear 0.5, 1.0 m/s, rotational 5, 10 deg/s, linear 1.5 m/s.
pub fn scenario2_set() -> Vec<ScenarioConfig> {
    dynamic_motions()
        .into_iter()
        .enumerate()
        .map(|(i, m)| ScenarioConfig {
            id: i as u32 + 1,
            start_depth: DYNAMIC_START_DISTANCE,
            start_bearing: 0.0,
            start_altitude: STATIC_START_ALTITUDE,
            pad_motion: m,
            wind: WindState::calm(),
            noise: NoiseModel::nominal(),
            seed: 2000 + i as u64 + 1,
        })
        .collect()
}
