//! File-based workflows behind the command-line verbs. Every artifact lives
//! under one output directory with fixed names, so repeated runs with the
//! same configuration and seeds overwrite identical bytes.

use super::config::HarnessConfig;
use super::metrics::{compute_metrics, MetricsRecord};
use super::report::{emit_report, ReportFormat};
use super::scenario::ScenarioConfig;
use super::suite::{run_suite, SuiteResult};
use super::HarnessError;
use crate::agent::qlearn::write_curve_csv;
use crate::agent::{train_landing, PolicySnapshot};
use crate::perception::EstimatorModel;
use crate::runner::{run_episode, Assist, HumanInput};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Static,
    Dynamic,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Static => "static",
            ScenarioKind::Dynamic => "dynamic",
        }
    }

    pub fn scenarios(self, cfg: &HarnessConfig) -> Vec<ScenarioConfig> {
        match self {
            ScenarioKind::Static => cfg.static_scenarios(),
            ScenarioKind::Dynamic => cfg.dynamic_scenarios(),
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(ScenarioKind::Static),
            "dynamic" => Ok(ScenarioKind::Dynamic),
            other => Err(HarnessError::InvalidConfig(format!("unknown scenario set {other:?}"))),
        }
    }
}

/// Artifact layout of an output directory.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub dir: PathBuf,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn estimator(&self) -> PathBuf {
        self.dir.join("estimator.llem")
    }

    pub fn policy(&self, seed: u64) -> PathBuf {
        self.dir.join(format!("policy_seed{seed}.llqp"))
    }

    pub fn curve(&self, seed: u64) -> PathBuf {
        self.dir.join(format!("curve_seed{seed}.csv"))
    }

    pub fn report(&self, stem: &str, format: ReportFormat) -> PathBuf {
        self.dir.join(format!("{stem}.{}", format.extension()))
    }

    pub fn trajectories(&self) -> PathBuf {
        self.dir.join("trajectories")
    }

    fn ensure(&self) -> Result<(), HarnessError> {
        fs::create_dir_all(&self.dir)?;
        Ok(())
    }
}

pub const ALL_FORMATS: [ReportFormat; 3] = [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Md];

/// Fits the estimator tables and writes them to the artifact directory.
pub fn fit_and_save(cfg: &HarnessConfig, art: &Artifacts) -> Result<EstimatorModel, HarnessError> {
    art.ensure()?;
    let model = cfg.fit_estimators()?;
    model.save(&art.estimator())?;
    Ok(model)
}

/// The saved estimator, or a fresh fit (saved) when none exists yet.
pub fn load_or_fit(cfg: &HarnessConfig, art: &Artifacts) -> Result<EstimatorModel, HarnessError> {
    let p = art.estimator();
    if p.exists() {
        Ok(EstimatorModel::load(&p)?)
    } else {
        fit_and_save(cfg, art)
    }
}

/// Trains one policy per seed, saving each policy and its learning curve.
pub fn train_and_save(
    cfg: &HarnessConfig,
    art: &Artifacts,
    model: Arc<EstimatorModel>,
    seeds: &[u64],
) -> Result<Vec<(u64, PolicySnapshot)>, HarnessError> {
    art.ensure()?;
    let task = cfg.task();
    let hp = cfg.rl.hyperparams;
    let runs = crate::agent::train_landing_seeds(&task, model, &hp, cfg.rl.episodes, seeds)?;
    let mut out = Vec::new();
    for (&seed, (policy, curve)) in seeds.iter().zip(runs) {
        policy.save(&art.policy(seed))?;
        write_curve_csv(&curve, fs::File::create(art.curve(seed))?)?;
        out.push((seed, policy));
    }
    Ok(out)
}

/// Trains a single seed without touching the file system.
pub fn train_one(cfg: &HarnessConfig, model: Arc<EstimatorModel>, seed: u64) -> Result<PolicySnapshot, HarnessError> {
    Ok(train_landing(&cfg.task(), model, &cfg.rl.hyperparams, cfg.rl.episodes, seed)?.0)
}

pub fn load_policy(art: &Artifacts, seed: u64) -> Result<PolicySnapshot, HarnessError> {
    let p = art.policy(seed);
    if !p.exists() {
        return Err(HarnessError::InvalidConfig(format!(
            "no policy at {}; run `monoland train` first",
            p.display()
        )));
    }
    Ok(PolicySnapshot::load(&p)?)
}

fn write_reports(art: &Artifacts, stem: &str, records: &[MetricsRecord]) -> Result<(), HarnessError> {
    for f in ALL_FORMATS {
        fs::write(art.report(stem, f), emit_report(records, f))?;
    }
    Ok(())
}

/// Evaluates the saved policy of each seed on a scenario set. Writes one
/// report per seed in every format and one trajectory log per episode.
pub fn eval_and_save(
    cfg: &HarnessConfig,
    art: &Artifacts,
    model: Arc<EstimatorModel>,
    kind: ScenarioKind,
    seeds: &[u64],
) -> Result<Vec<(u64, SuiteResult)>, HarnessError> {
    art.ensure()?;
    fs::create_dir_all(art.trajectories())?;
    let scenarios = kind.scenarios(cfg);
    let mut out = Vec::new();
    for &seed in seeds {
        let policy = Arc::new(load_policy(art, seed)?);
        let res = run_suite(&scenarios, policy, model.clone(), &cfg.scene, &cfg.suite_options(HumanInput::None))?;
        let stem = format!("eval_{}_seed{seed}", kind.name());
        write_reports(art, &stem, &res.records)?;
        for run in &res.runs {
            if let Some(t) = &run.trajectory {
                let name = format!(
                    "{}_seed{seed}_case{:02}_rep{}.json",
                    kind.name(),
                    scenarios[run.scenario].id,
                    run.repeat
                );
                fs::write(art.trajectories().join(name), t.to_json())?;
            }
        }
        out.push((seed, res));
    }
    Ok(out)
}

/// Re-renders a JSON record file in another format.
pub fn convert_report(input: &Path, format: ReportFormat) -> Result<String, HarnessError> {
    let records: Vec<MetricsRecord> = serde_json::from_str(&fs::read_to_string(input)?)?;
    Ok(emit_report(&records, format))
}

/// Scripted pilot flown with and without the co-pilot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoSummary {
    pub assisted: Vec<MetricsRecord>,
    pub unassisted: Vec<MetricsRecord>,
}

impl DemoSummary {
    fn mean_displacement(r: &[MetricsRecord]) -> f64 {
        r.iter().map(|m| m.lateral_displacement_cm).sum::<f64>() / r.len().max(1) as f64
    }

    pub fn assisted_mean_cm(&self) -> f64 {
        Self::mean_displacement(&self.assisted)
    }

    pub fn unassisted_mean_cm(&self) -> f64 {
        Self::mean_displacement(&self.unassisted)
    }
}

/// Flies the configured scripted pilot on every static case, once blended
/// with the co-pilot and once alone (`alpha_max = 0`).
pub fn demo_pilot(
    cfg: &HarnessConfig,
    art: &Artifacts,
    policy: Arc<PolicySnapshot>,
    model: Arc<EstimatorModel>,
    seed: u64,
) -> Result<DemoSummary, HarnessError> {
    art.ensure()?;
    fs::create_dir_all(art.trajectories())?;
    let human = HumanInput::Pilot { model: cfg.pilot };
    let mut summary = DemoSummary {
        assisted: Vec::new(),
        unassisted: Vec::new(),
    };
    for sc in cfg.static_scenarios() {
        let s = sc.repeat_seed(seed as usize);
        for (label, assist) in [
            ("assisted", cfg.assist()),
            (
                "unassisted",
                Assist {
                    alpha_max: 0.0,
                    ..cfg.assist()
                },
            ),
        ] {
            let traj = run_episode(sc.setup(&cfg.scene, s)?, policy.clone(), model.clone(), human.clone(), assist)?;
            let m = compute_metrics(&traj, &sc);
            fs::write(
                art.trajectories().join(format!("demo_{label}_case{:02}.json", sc.id)),
                traj.to_json(),
            )?;
            if label == "assisted" {
                summary.assisted.push(m);
            } else {
                summary.unassisted.push(m);
            }
        }
    }
    write_reports(art, "demo_assisted", &summary.assisted)?;
    write_reports(art, "demo_unassisted", &summary.unassisted)?;
    Ok(summary)
}
