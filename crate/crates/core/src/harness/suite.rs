//! Repeated greedy rollouts over a scenario list.

use super::metrics::{aggregate, compute_metrics, MetricsRecord};
use super::scenario::ScenarioConfig;
use super::HarnessError;
use crate::agent::PolicySnapshot;
use crate::perception::EstimatorModel;
use crate::runner::{run_episode, Assist, HumanInput, Trajectory};
use crate::scene::Scene;
use rayon::prelude::*;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub repeats: usize,
    pub parallel: bool,
    pub human: HumanInput,
    pub assist: Assist,
    /// Keep every trajectory in the result; off saves memory on big sweeps.
    pub keep_trajectories: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            repeats: 5,
            parallel: true,
            human: HumanInput::None,
            assist: Assist::default(),
            keep_trajectories: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub scenario: usize,
    pub repeat: usize,
    pub seed: u64,
    pub metrics: MetricsRecord,
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    /// One record per scenario: the mean over repeats.
    pub records: Vec<MetricsRecord>,
    /// Every individual run, scenario-major.
    pub runs: Vec<SuiteRun>,
}

/// Runs every scenario `opts.repeats` times. Results are independent of
/// `opts.parallel` and of thread scheduling.
pub fn run_suite(
    configs: &[ScenarioConfig],
    policy: Arc<PolicySnapshot>,
    estimator: Arc<EstimatorModel>,
    scene: &Scene,
    opts: &SuiteOptions,
) -> Result<SuiteResult, HarnessError> {
    if opts.repeats == 0 {
        return Err(HarnessError::InvalidConfig("repeats must be at least 1".into()));
    }
    for c in configs {
        c.validate()?;
    }
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|i| (0..opts.repeats).map(move |r| (i, r)))
        .collect();
    let one = |&(i, r): &(usize, usize)| -> Result<SuiteRun, HarnessError> {
        let sc = &configs[i];
        let seed = sc.repeat_seed(r);
        let setup = sc.setup(scene, seed)?;
        let traj = run_episode(setup, policy.clone(), estimator.clone(), opts.human.clone(), opts.assist.clone())?;
        Ok(SuiteRun {
            scenario: i,
            repeat: r,
            seed,
            metrics: compute_metrics(&traj, sc),
            trajectory: opts.keep_trajectories.then_some(traj),
        })
    };
    let runs: Vec<SuiteRun> = if opts.parallel {
        jobs.par_iter().map(one).collect::<Result<_, _>>()?
    } else {
        jobs.iter().map(one).collect::<Result<_, _>>()?
    };
    let records = runs
        .chunks(opts.repeats)
        .filter_map(|c| aggregate(&c.iter().map(|r| r.metrics).collect::<Vec<_>>()))
        .collect();
    Ok(SuiteResult { records, runs })
}
