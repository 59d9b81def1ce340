//! The per-tick simulation core shared by training, headless rollouts,
//! shared-autonomy runs and live bridge sessions.
//!
//! One tick: step the world with the actuated command, classify touchdown,
//! observe the landmark through the noisy camera, update the estimate.

use crate::optics::{ColorBand, LandmarkObservation};
use crate::perception::{commanded_velocity, corrupt, estimate, EstimatorModel, NoiseModel, PositionEstimate};
use crate::scene::{RelativePose, Scene};
use crate::world::{self, touchdown_outcome, ControlCommand, DroneState, TouchdownOutcome, WindState, WorldError};
use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Flight envelope outside which an episode is aborted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bounds {
    pub max_altitude: f64,
    /// Maximum horizontal distance from the pad center, meters.
    pub max_range: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            max_altitude: 12.0,
            max_range: 25.0,
        }
    }
}

/// Episode length cap: 600 ticks, 30 s at the default step.
pub const DEFAULT_MAX_STEPS: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EpisodeStatus {
    Running,
    Landed { lateral_displacement: f64 },
    Crashed,
    OutOfBounds,
    TimedOut,
}

impl EpisodeStatus {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, EpisodeStatus::Running)
    }
}

/// Everything needed to start one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSetup {
    pub scene: Scene,
    pub wind: WindState,
    pub noise: NoiseModel,
    pub bounds: Bounds,
    pub max_steps: usize,
    pub start: DroneState,
    pub seed: u64,
}

/// Seed of the perception-noise stream for an episode.
pub fn noise_stream_seed(episode_seed: u64, noise: &NoiseModel) -> u64 {
    episode_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ noise.seed ^ 0x6e6f_6973_6500_0001
}

#[derive(Debug, Clone)]
pub struct Sim {
    pub setup: EpisodeSetup,
    pub state: DroneState,
    pub observation: LandmarkObservation,
    pub estimate: Option<PositionEstimate>,
    /// Band of the most recent visible observation.
    pub last_color: ColorBand,
    pub status: EpisodeStatus,
    pub steps: usize,
    noise_rng: ChaCha8Rng,
}

impl Sim {
    pub fn new(setup: EpisodeSetup, model: &EstimatorModel) -> Self {
        let mut noise_rng = ChaCha8Rng::seed_from_u64(noise_stream_seed(setup.seed, &setup.noise));
        let state = setup.start;
        let observation = corrupt(
            &setup.scene.observe(&state),
            &setup.noise,
            &setup.scene.landmark,
            &mut noise_rng,
        );
        let estimate = estimate(&observation, model, None, &Vector3::zeros(), setup.scene.world.dt).ok();
        let last_color = observation.view.map(|v| v.color_band).unwrap_or(ColorBand::A);
        Self {
            setup,
            state,
            observation,
            estimate,
            last_color,
            status: EpisodeStatus::Running,
            steps: 0,
            noise_rng,
        }
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    pub fn truth(&self) -> RelativePose {
        self.setup.scene.truth(&self.state)
    }

    pub fn pad_center(&self) -> Vector3<f64> {
        self.setup.scene.pad.center_at(self.state.time)
    }

    /// Advances one tick with the actuated command. Commands are clamped
    /// into the envelope first. Calling this after a terminal status is a
    /// no-op that returns the terminal status.
    pub fn advance(&mut self, cmd: &ControlCommand, model: &EstimatorModel) -> Result<EpisodeStatus, WorldError> {
        if self.status.is_terminal() {
            return Ok(self.status);
        }
        let scene = &self.setup.scene;
        let cmd = cmd.clamped(&scene.world);
        let next = world::step(&self.state, &cmd, &self.setup.wind, scene.world.dt, &scene.world)?;
        self.state = next;
        self.steps += 1;

        let pad = scene.pad.center_at(next.time);
        let horizontal = (next.position.x - pad.x).hypot(next.position.y - pad.y);
        self.status = match touchdown_outcome(&next, cmd.land, &scene.pad, &scene.world) {
            TouchdownOutcome::Landed { lateral_displacement } => EpisodeStatus::Landed { lateral_displacement },
            TouchdownOutcome::Crashed => EpisodeStatus::Crashed,
            TouchdownOutcome::Airborne => {
                if next.position.z > self.setup.bounds.max_altitude || horizontal > self.setup.bounds.max_range {
                    EpisodeStatus::OutOfBounds
                } else if self.steps >= self.setup.max_steps {
                    EpisodeStatus::TimedOut
                } else {
                    EpisodeStatus::Running
                }
            }
        };

        self.observation = corrupt(&scene.observe(&next), &self.setup.noise, &scene.landmark, &mut self.noise_rng);
        if let Some(v) = &self.observation.view {
            self.last_color = v.color_band;
        }
        let flown = commanded_velocity(&cmd, &scene.world);
        self.estimate = estimate(&self.observation, model, self.estimate.as_ref(), &flown, scene.world.dt).ok();
        Ok(self.status)
    }
}
