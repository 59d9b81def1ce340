//! Reinforcement-learning landing agent: perceived-state encoding, discrete
//! velocity actions, shaped reward, tabular Q-learning and rollouts.
//!
//! The agent only ever sees perception output (the position estimate and
//! the last observed color band), never ground truth.

pub mod action;
pub mod encoding;
pub mod env;
pub mod qlearn;
pub mod reward;

pub use action::{ActionSpec, HOVER, LAND, NUM_ACTIONS};
pub use encoding::{encode, BinScheme, EncodedState};
pub use env::{start_state, ChainMdp, Environment, LandingEnv, LandingTask, StartSampler, Transition};
pub use qlearn::{act, train, train_from, CurvePoint, Exploration, Hyperparams, PolicySnapshot};
pub use reward::RewardSpec;

use crate::episode::{EpisodeStatus, Sim};
use crate::harness::{compute_metrics, MetricsRecord, ScenarioConfig};
use crate::perception::EstimatorModel;
use crate::runner::{run_episode, Assist, HumanInput, Trajectory};
use crate::scene::Scene;
use rayon::prelude::*;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("bad policy file: {0}")]
    BadFormat(String),
    #[error(transparent)]
    World(#[from] crate::world::WorldError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Table index of a simulator's current perceived state.
pub fn encode_sim(bins: &BinScheme, sim: &Sim) -> usize {
    if sim.status.is_terminal() && sim.status != EpisodeStatus::TimedOut {
        return bins.terminal().0;
    }
    match &sim.estimate {
        Some(e) => bins.encode(e, sim.last_color).0,
        // Never seen the landmark yet: the farthest, least certain state.
        None => bins.live_states() - 1,
    }
}

/// Trains a landing policy on `task`. Deterministic given `seed`.
pub fn train_landing(
    task: &LandingTask,
    model: Arc<EstimatorModel>,
    hp: &Hyperparams,
    episodes: usize,
    seed: u64,
) -> Result<(PolicySnapshot, Vec<CurvePoint>), AgentError> {
    if !task.bins.is_valid() {
        return Err(AgentError::InvalidConfig("bin edges must be finite and increasing".into()));
    }
    if !task.actions.is_valid(&task.scene.world) {
        return Err(AgentError::InvalidConfig("action speeds exceed the command envelope".into()));
    }
    if !task.reward.is_valid() {
        return Err(AgentError::InvalidConfig("reward must satisfy r_crash < 0 < land bonus".into()));
    }
    let mut env = LandingEnv::new(task.clone(), model);
    let (mut policy, curve) = train(&mut env, hp, episodes, seed)?;
    policy.bins = task.bins.clone();
    policy.actions = task.actions;
    Ok((policy, curve))
}

/// Trains one independent policy per seed in parallel. Each result is
/// identical to a sequential [`train_landing`] call with the same seed.
pub fn train_landing_seeds(
    task: &LandingTask,
    model: Arc<EstimatorModel>,
    hp: &Hyperparams,
    episodes: usize,
    seeds: &[u64],
) -> Result<Vec<(PolicySnapshot, Vec<CurvePoint>)>, AgentError> {
    seeds
        .par_iter()
        .map(|&s| train_landing(task, model.clone(), hp, episodes, s))
        .collect()
}

/// Greedy co-pilot-only episode for one scenario.
pub fn rollout(
    policy: Arc<PolicySnapshot>,
    model: Arc<EstimatorModel>,
    scene: &Scene,
    scenario: &ScenarioConfig,
    seed: u64,
) -> Result<(Trajectory, MetricsRecord), AgentError> {
    let setup = scenario
        .setup(scene, seed)
        .map_err(|e| AgentError::InvalidConfig(e.to_string()))?;
    let traj = run_episode(setup, policy, model, HumanInput::None, Assist::default())?;
    let metrics = compute_metrics(&traj, scenario);
    Ok((traj, metrics))
}
