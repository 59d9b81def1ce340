//! Episodic environments for tabular learning: the landing task over the
//! simulator, and a three-state chain used as a learning oracle.

use super::action::{ActionSpec, LAND, NUM_ACTIONS};
use super::encoding::BinScheme;
use super::encode_sim;
use super::reward::{reward, RewardSpec};
use crate::episode::{Bounds, EpisodeSetup, EpisodeStatus, Sim, DEFAULT_MAX_STEPS};
use crate::perception::{EstimatorModel, NoiseModel};
use crate::scene::Scene;
use crate::world::{DroneState, MotionPattern, WindState};
use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub reward: f64,
    /// The episode reached a true terminal state (no bootstrapping).
    pub done: bool,
    /// The episode was cut by the step cap (bootstrapping continues).
    pub truncated: bool,
}

pub trait Environment {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> usize;
    fn step(&mut self, action: usize) -> Transition;
}

/// States 0 and 1 plus an absorbing goal 2. Action 0 moves left (state 0
/// stays put), action 1 moves right; entering the goal pays 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainMdp {
    pub state: usize,
    pub steps: usize,
    pub max_steps: usize,
}

impl ChainMdp {
    pub const GOAL: usize = 2;
    pub const LEFT: usize = 0;
    pub const RIGHT: usize = 1;

    pub fn new() -> Self {
        Self {
            state: 0,
            steps: 0,
            max_steps: 50,
        }
    }
}

impl Default for ChainMdp {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for ChainMdp {
    fn num_states(&self) -> usize {
        3
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn reset(&mut self, _rng: &mut ChaCha8Rng) -> usize {
        self.state = 0;
        self.steps = 0;
        0
    }

    fn step(&mut self, action: usize) -> Transition {
        self.steps += 1;
        let next = match (self.state, action) {
            (s, Self::RIGHT) => s + 1,
            (0, _) => 0,
            (s, _) => s - 1,
        };
        self.state = next;
        let done = next == Self::GOAL;
        Transition {
            state: next,
            reward: if done { 1.0 } else { 0.0 },
            done,
            truncated: !done && self.steps >= self.max_steps,
        }
    }
}

/// Distribution of training start poses: a horizontal distance and bearing
/// from the pad at a nominal altitude, jittered uniformly per axis. A
/// fraction of episodes instead starts close to the pad at low altitude,
/// so the final approach is experienced far more often than a full
/// approach alone would allow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StartSampler {
    pub distance: [f64; 2],
    pub bearing_deg: [f64; 2],
    pub altitude: f64,
    pub jitter: f64,
    pub near_fraction: f64,
    pub near_distance: [f64; 2],
    pub near_altitude: [f64; 2],
}

impl Default for StartSampler {
    fn default() -> Self {
        Self {
            distance: [5.0, 15.0],
            bearing_deg: [-30.0, 30.0],
            altitude: 2.5,
            jitter: 1.0,
            near_fraction: 0.3,
            near_distance: [0.2, 3.0],
            near_altitude: [0.3, 1.2],
        }
    }
}

/// Drone start state at a given distance and bearing from a pad center,
/// facing down the approach axis. Positive bearing places the drone to the left.
pub fn start_state(pad_center: Vector3<f64>, distance: f64, bearing_deg: f64, altitude: f64) -> DroneState {
    let b = bearing_deg.to_radians();
    DroneState::at(Vector3::new(
        pad_center.x - distance * b.cos(),
        pad_center.y + distance * b.sin(),
        altitude,
    ))
}

impl StartSampler {
    pub fn sample<R: Rng + ?Sized>(&self, pad_center: Vector3<f64>, rng: &mut R) -> DroneState {
        if self.near_fraction > 0.0 && rng.random_bool(self.near_fraction.min(1.0)) {
            let d = rng.random_range(self.near_distance[0]..=self.near_distance[1]);
            let b = rng.random_range(self.bearing_deg[0]..=self.bearing_deg[1]);
            let z = rng.random_range(self.near_altitude[0]..=self.near_altitude[1]);
            return start_state(pad_center, d, b, z);
        }
        let d = rng.random_range(self.distance[0]..=self.distance[1]);
        let b = rng.random_range(self.bearing_deg[0]..=self.bearing_deg[1]);
        let mut s = start_state(pad_center, d, b, self.altitude);
        if self.jitter > 0.0 {
            for k in 0..3 {
                s.position[k] += rng.random_range(-self.jitter..=self.jitter);
            }
        }
        s.position.z = s.position.z.max(0.2);
        s
    }
}

/// Everything that defines the landing task apart from the learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LandingTask {
    pub scene: Scene,
    pub noise: NoiseModel,
    pub wind: WindState,
    pub bounds: Bounds,
    pub max_steps: usize,
    pub bins: BinScheme,
    pub actions: ActionSpec,
    pub reward: RewardSpec,
    pub start: StartSampler,
    /// Pad motions drawn uniformly per training episode.
    pub pad_motions: Vec<MotionPattern>,
}

impl Default for LandingTask {
    fn default() -> Self {
        Self {
            scene: Scene::default(),
            noise: NoiseModel::default(),
            wind: WindState::calm(),
            bounds: Bounds::default(),
            max_steps: DEFAULT_MAX_STEPS,
            bins: BinScheme::default(),
            actions: ActionSpec::default(),
            reward: RewardSpec::default(),
            start: StartSampler::default(),
            pad_motions: vec![MotionPattern::Static],
        }
    }
}

/// Attempts at drawing a start pose with the landmark in view.
const MAX_START_TRIES: usize = 1000;

pub struct LandingEnv {
    pub task: LandingTask,
    pub model: Arc<EstimatorModel>,
    pub sim: Option<Sim>,
}

impl LandingEnv {
    pub fn new(task: LandingTask, model: Arc<EstimatorModel>) -> Self {
        Self { task, model, sim: None }
    }

    fn encoded(&self) -> usize {
        encode_sim(&self.task.bins, self.sim.as_ref().expect("reset first"))
    }
}

impl Environment for LandingEnv {
    fn num_states(&self) -> usize {
        self.task.bins.num_states()
    }

    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> usize {
        let motions = &self.task.pad_motions;
        let mut scene = self.task.scene;
        if !motions.is_empty() {
            scene.pad.motion = motions[rng.random_range(0..motions.len())];
        }
        let mut sim = None;
        for _ in 0..MAX_START_TRIES {
            let start = self.task.start.sample(scene.pad.center, rng);
            let setup = EpisodeSetup {
                scene,
                wind: self.task.wind,
                noise: self.task.noise,
                bounds: self.task.bounds,
                max_steps: self.task.max_steps,
                start,
                seed: rng.random(),
            };
            let candidate = Sim::new(setup, &self.model);
            if candidate.estimate.is_some() {
                sim = Some(candidate);
                break;
            }
        }
        let sim = sim.expect("start sampler never produced a visible landmark");
        self.sim = Some(sim);
        self.encoded()
    }

    /// One decision. A velocity action is held until the encoded state
    /// changes or `max_hold` ticks pass; LAND commits and the descent is
    /// flown to touchdown (or the step cap). The reward is summed over the
    /// ticks of the decision.
    fn step(&mut self, action: usize) -> Transition {
        let from = self.encoded();
        let cmd = self.task.actions.command(action);
        let max_hold = self.task.actions.max_hold.max(1);
        let pad_radius = self.task.scene.pad.radius;
        let mut total = 0.0;
        let mut ticks = 0;
        loop {
            let sim = self.sim.as_mut().expect("step before reset");
            let prev = sim.estimate;
            let status = sim
                .advance(&cmd, &self.model)
                .expect("action commands are always within the envelope");
            total += reward(prev.as_ref(), sim.estimate.as_ref(), &status, &self.task.reward, pad_radius);
            ticks += 1;
            if status.is_terminal() {
                break;
            }
            if action != LAND && (ticks >= max_hold || self.encoded() != from) {
                break;
            }
        }
        let status = self.sim.as_ref().map(|s| s.status).unwrap_or(EpisodeStatus::Running);
        Transition {
            state: self.encoded(),
            reward: total,
            done: status.is_terminal() && status != EpisodeStatus::TimedOut,
            truncated: status == EpisodeStatus::TimedOut,
        }
    }
}
