//! Closed-loop episodes: co-pilot policy, optional human input, arbitration
//! and the simulator, with a full per-step log.
//!
//! Headless rollouts and live bridge sessions both drive [`Runner::tick`],
//! so a session fed the same command log reproduces a headless run exactly.

use crate::agent::{encode_sim, PolicySnapshot, LAND};
use crate::agent::reward::{reward, RewardSpec};
use crate::episode::{EpisodeSetup, EpisodeStatus, Sim};
use crate::optics::LandmarkObservation;
use crate::perception::{EstimatorModel, PositionEstimate};
use crate::scene::RelativePose;
use crate::shared::{arbitrate, pilot_command, CommandLog, IntentModel, PilotModel, PilotView, DEFAULT_ALPHA_MAX};
use crate::world::{platform_velocity, ControlCommand, DroneState, WorldError};
use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Source of human commands for an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum HumanInput {
    /// Co-pilot flies alone; no arbitration at all.
    None,
    Pilot { model: PilotModel },
    /// Zero-order-hold playback of a recorded or live command log.
    Log { log: CommandLog },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Assist {
    pub alpha_max: f64,
    /// Fixed conflict value instead of the measured one.
    pub conflict_override: Option<f64>,
    pub intent: Option<IntentModel>,
}

impl Default for Assist {
    fn default() -> Self {
        Self {
            alpha_max: DEFAULT_ALPHA_MAX,
            conflict_override: None,
            intent: None,
        }
    }
}

/// Seed of the pilot-noise stream for an episode.
pub fn pilot_stream_seed(episode_seed: u64) -> u64 {
    episode_seed.rotate_left(29) ^ 0x7069_6c6f_7400_0002
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Simulation time after the step.
    pub t: f64,
    pub state: DroneState,
    pub pad_center: Vector3<f64>,
    pub truth: RelativePose,
    pub observation: LandmarkObservation,
    pub estimate: Option<PositionEstimate>,
    pub action: usize,
    pub ai: ControlCommand,
    pub human: Option<ControlCommand>,
    pub blended: ControlCommand,
    pub alpha: f64,
    pub conflict: f64,
    pub reward: f64,
    pub status: EpisodeStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialRecord {
    pub state: DroneState,
    pub pad_center: Vector3<f64>,
    pub truth: RelativePose,
    pub observation: LandmarkObservation,
    pub estimate: Option<PositionEstimate>,
}

/// One episode log: configuration, seed and every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub setup: EpisodeSetup,
    pub seed: u64,
    pub human: HumanInput,
    pub assist: Assist,
    pub initial: InitialRecord,
    pub steps: Vec<StepRecord>,
    pub status: EpisodeStatus,
}

impl Trajectory {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trajectory serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn duration(&self) -> f64 {
        self.steps.last().map(|s| s.t).unwrap_or(self.initial.state.time)
    }
}

/// Keeps the human history only as long as the intent model needs.
const HISTORY_CAP: usize = 64;

pub struct Runner {
    pub sim: Sim,
    pub policy: Arc<PolicySnapshot>,
    pub model: Arc<EstimatorModel>,
    pub human: HumanInput,
    pub assist: Assist,
    pub reward: RewardSpec,
    pub records: Vec<StepRecord>,
    initial: InitialRecord,
    history: Vec<ControlCommand>,
    pilot_rng: ChaCha8Rng,
    /// Set once the co-pilot has chosen LAND; it then keeps landing.
    landing: bool,
    /// Co-pilot decision being held: (action, encoded state, ticks held).
    held: Option<(usize, usize, u32)>,
}

impl Runner {
    pub fn new(
        setup: EpisodeSetup,
        policy: Arc<PolicySnapshot>,
        model: Arc<EstimatorModel>,
        human: HumanInput,
        assist: Assist,
    ) -> Self {
        let pilot_rng = ChaCha8Rng::seed_from_u64(pilot_stream_seed(setup.seed));
        let sim = Sim::new(setup, &model);
        let initial = InitialRecord {
            state: sim.state,
            pad_center: sim.pad_center(),
            truth: sim.truth(),
            observation: sim.observation,
            estimate: sim.estimate,
        };
        Self {
            sim,
            policy,
            model,
            human,
            assist,
            reward: RewardSpec::default(),
            records: Vec::new(),
            initial,
            history: Vec::new(),
            pilot_rng,
            landing: false,
            held: None,
        }
    }

    pub fn is_done(&self) -> bool {
        self.sim.status.is_terminal()
    }

    /// Co-pilot action and command for the current perceived state. A
    /// velocity action is held until the encoded state changes or the hold
    /// limit is reached; after choosing LAND the co-pilot keeps landing.
    pub fn ai_command(&self) -> (usize, ControlCommand) {
        let a = if self.landing {
            LAND
        } else {
            let s = encode_sim(&self.policy.bins, &self.sim);
            match self.held {
                Some((a, hs, n)) if hs == s && n < self.policy.actions.max_hold.max(1) => a,
                _ => self.policy.greedy(s),
            }
        };
        (a, self.policy.actions.command(a))
    }

    fn human_command(&mut self) -> Option<ControlCommand> {
        let t = self.sim.time();
        let scene = &self.sim.setup.scene;
        match &self.human {
            HumanInput::None => None,
            HumanInput::Pilot { model } => {
                let view = PilotView {
                    drone: self.sim.state,
                    pad_center: scene.pad.center_at(t),
                    pad_velocity: platform_velocity(&scene.pad.motion, scene.pad.center, t),
                    wind: self.sim.setup.wind,
                };
                Some(pilot_command(model, &view, t, &scene.world, &mut self.pilot_rng))
            }
            HumanInput::Log { log } => Some(log.held_at(t)),
        }
    }

    /// Runs one tick. After a terminal status this is a no-op returning `None`.
    pub fn tick(&mut self) -> Result<Option<&StepRecord>, WorldError> {
        if self.is_done() {
            return Ok(None);
        }
        let (action, ai) = self.ai_command();
        self.landing |= action == LAND;
        let s = encode_sim(&self.policy.bins, &self.sim);
        self.held = match self.held {
            Some((a, hs, n)) if a == action && hs == s && n < self.policy.actions.max_hold.max(1) => Some((a, hs, n + 1)),
            _ => Some((action, s, 1)),
        };
        let human = self.human_command();
        let cfg = self.sim.setup.scene.world;
        let (blended, alpha, conflict) = match &human {
            None => (ai, 1.0, 0.0),
            Some(h) => {
                self.history.push(*h);
                if self.history.len() > HISTORY_CAP {
                    self.history.remove(0);
                }
                let predicted = self.assist.intent.as_ref().map(|m| m.predict(&self.history, &cfg));
                let b = arbitrate(
                    h,
                    &ai,
                    predicted.as_ref(),
                    self.assist.alpha_max,
                    self.assist.conflict_override,
                    &cfg,
                );
                (b.command, b.alpha, b.conflict)
            }
        };
        let prev = self.sim.estimate;
        let status = self.sim.advance(&blended, &self.model)?;
        let r = reward(prev.as_ref(), self.sim.estimate.as_ref(), &status, &self.reward, self.sim.setup.scene.pad.radius);
        self.records.push(StepRecord {
            step: self.sim.steps,
            t: self.sim.time(),
            state: self.sim.state,
            pad_center: self.sim.pad_center(),
            truth: self.sim.truth(),
            observation: self.sim.observation,
            estimate: self.sim.estimate,
            action,
            ai,
            human,
            blended,
            alpha,
            conflict,
            reward: r,
            status,
        });
        Ok(self.records.last())
    }

    pub fn run_to_end(mut self) -> Result<Trajectory, WorldError> {
        while !self.is_done() {
            self.tick()?;
        }
        Ok(self.into_trajectory())
    }

    pub fn trajectory(&self) -> Trajectory {
        Trajectory {
            setup: self.sim.setup.clone(),
            seed: self.sim.setup.seed,
            human: self.human.clone(),
            assist: self.assist.clone(),
            initial: self.initial.clone(),
            steps: self.records.clone(),
            status: self.sim.status,
        }
    }

    pub fn into_trajectory(self) -> Trajectory {
        Trajectory {
            seed: self.sim.setup.seed,
            status: self.sim.status,
            setup: self.sim.setup,
            human: self.human,
            assist: self.assist,
            initial: self.initial,
            steps: self.records,
        }
    }
}

/// Runs one episode to its end.
pub fn run_episode(
    setup: EpisodeSetup,
    policy: Arc<PolicySnapshot>,
    model: Arc<EstimatorModel>,
    human: HumanInput,
    assist: Assist,
) -> Result<Trajectory, WorldError> {
    Runner::new(setup, policy, model, human, assist).run_to_end()
}
