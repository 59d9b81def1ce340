//! The run configuration: one TOML document with world, optics, noise,
//! estimator-fit, learning, blending and evaluation sections. Every key is
//! optional and falls back to its default.

use super::scenario::{scenario1_grid, scenario2_set, ScenarioConfig};
use super::suite::SuiteOptions;
use super::HarnessError;
use crate::agent::{ActionSpec, BinScheme, Hyperparams, LandingTask, RewardSpec, StartSampler};
use crate::episode::{Bounds, DEFAULT_MAX_STEPS};
use crate::perception::{collect_training_set, fit_estimators, EstimatorModel, FitOptions, NoiseModel, PoseSampler};
use crate::runner::{Assist, HumanInput};
use crate::scene::Scene;
use crate::shared::{PilotKind, PilotModel, DEFAULT_ALPHA_MAX};
use crate::world::{MotionPattern, WindState};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitSection {
    pub samples: usize,
    pub seed: u64,
    pub sampler: PoseSampler,
    pub noise: NoiseModel,
    pub options: FitOptions,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            samples: 20_000,
            seed: 7,
            sampler: PoseSampler::default(),
            noise: NoiseModel::default(),
            options: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RlSection {
    pub episodes: usize,
    /// Training seeds; `train` produces one policy per seed.
    pub seeds: Vec<u64>,
    pub hyperparams: Hyperparams,
    pub noise: NoiseModel,
    pub max_steps: usize,
    pub bounds: Bounds,
    pub bins: BinScheme,
    pub actions: ActionSpec,
    pub reward: RewardSpec,
    pub start: StartSampler,
    pub pad_motions: Vec<MotionPattern>,
}

impl Default for RlSection {
    fn default() -> Self {
        let task = LandingTask::default();
        Self {
            episodes: 50_000,
            seeds: vec![1, 2, 3],
            hyperparams: Hyperparams::default(),
            noise: NoiseModel::nominal(),
            max_steps: DEFAULT_MAX_STEPS,
            bounds: task.bounds,
            bins: task.bins,
            actions: task.actions,
            reward: task.reward,
            start: task.start,
            pad_motions: task.pad_motions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlendSection {
    pub alpha_max: f64,
    pub conflict_override: Option<f64>,
}

impl Default for BlendSection {
    fn default() -> Self {
        Self {
            alpha_max: DEFAULT_ALPHA_MAX,
            conflict_override: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSection {
    pub repeats: usize,
    pub parallel: bool,
    /// Measurement noise of evaluation and live sessions.
    pub noise: NoiseModel,
    pub wind: WindState,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            repeats: 5,
            parallel: true,
            noise: NoiseModel::nominal(),
            wind: WindState::calm(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub scene: Scene,
    pub fit: FitSection,
    pub rl: RlSection,
    pub blend: BlendSection,
    pub eval: EvalSection,
    /// Scripted pilot used by `demo-pilot`.
    pub pilot: PilotModel,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            scene: Scene::default(),
            fit: FitSection::default(),
            rl: RlSection::default(),
            blend: BlendSection::default(),
            eval: EvalSection::default(),
            pilot: PilotModel::new(PilotKind::Noisy { sigma: 0.3 }),
        }
    }
}

impl HarnessConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, HarnessError> {
        let c: Self = toml::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidConfig(m.to_string()));
        let w = &self.scene.world;
        if ![w.dt, w.v_max, w.v_land_max, w.wind_max, w.yaw_rate_max]
            .iter()
            .all(|x| x.is_finite() && *x > 0.0)
        {
            return bad("world limits must be positive and finite");
        }
        let invalid = |e: &dyn std::fmt::Display| HarnessError::InvalidConfig(e.to_string());
        self.scene.pad.validate().map_err(|e| invalid(&e))?;
        self.scene.landmark.validate().map_err(|e| invalid(&e))?;
        self.scene.camera.validate().map_err(|e| invalid(&e))?;
        if !self.fit.noise.is_valid() || !self.rl.noise.is_valid() || !self.eval.noise.is_valid() {
            return bad("noise parameters must be non-negative, dropout within [0, 1)");
        }
        if self.rl.seeds.is_empty() {
            return bad("rl.seeds must not be empty");
        }
        if self.rl.pad_motions.is_empty() {
            return bad("rl.pad_motions must not be empty");
        }
        if !(0.0..=1.0).contains(&self.blend.alpha_max) {
            return bad("blend.alpha_max must lie in [0, 1]");
        }
        if self.blend.conflict_override.is_some_and(|c| !(0.0..=1.0).contains(&c)) {
            return bad("blend.conflict_override must lie in [0, 1]");
        }
        if self.eval.repeats == 0 {
            return bad("eval.repeats must be at least 1");
        }
        if !self.pilot.is_valid() {
            return bad("pilot gains must be positive");
        }
        self.eval
            .wind
            .validate(&self.scene.world)
            .map_err(|e| invalid(&e))
    }

    /// Fits the altitude and depth tables on freshly simulated samples.
    pub fn fit_estimators(&self) -> Result<EstimatorModel, HarnessError> {
        let f = &self.fit;
        let samples = collect_training_set(&self.scene, &f.sampler, &f.noise, f.samples, f.seed)?;
        Ok(fit_estimators(
            &samples,
            &self.scene.camera,
            self.scene.landmark.offset_from_pad,
            &f.options,
        )?)
    }

    pub fn task(&self) -> LandingTask {
        let rl = &self.rl;
        LandingTask {
            scene: self.scene,
            noise: rl.noise,
            wind: WindState::calm(),
            bounds: rl.bounds,
            max_steps: rl.max_steps,
            bins: rl.bins.clone(),
            actions: rl.actions,
            reward: rl.reward,
            start: rl.start.clone(),
            pad_motions: rl.pad_motions.clone(),
        }
    }

    fn with_eval(&self, mut v: Vec<ScenarioConfig>) -> Vec<ScenarioConfig> {
        for s in &mut v {
            s.noise = self.eval.noise;
            s.wind = self.eval.wind;
        }
        v
    }

    pub fn static_scenarios(&self) -> Vec<ScenarioConfig> {
        self.with_eval(scenario1_grid())
    }

    pub fn dynamic_scenarios(&self) -> Vec<ScenarioConfig> {
        self.with_eval(scenario2_set())
    }

    pub fn assist(&self) -> Assist {
        Assist {
            alpha_max: self.blend.alpha_max,
            conflict_override: self.blend.conflict_override,
            intent: None,
        }
    }

    pub fn suite_options(&self, human: HumanInput) -> SuiteOptions {
        SuiteOptions {
            repeats: self.eval.repeats,
            parallel: self.eval.parallel,
            human,
            assist: self.assist(),
            keep_trajectories: true,
        }
    }
}
