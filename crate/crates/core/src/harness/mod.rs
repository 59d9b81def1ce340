//! Experiment harness: the static and moving-pad scenario sets, per-episode
//! metrics, suite execution, report emission, the TOML run configuration
//! and the file-based workflows used by the command line.

pub mod config;
pub mod metrics;
pub mod report;
pub mod scenario;
pub mod suite;
pub mod workflow;

pub use config::{BlendSection, EvalSection, FitSection, HarnessConfig, RlSection};
pub use metrics::{aggregate, compute_metrics, MetricsRecord, MotionType};
pub use report::{emit_report, ReportFormat, DYNAMIC_HEADER, STATIC_HEADER};
pub use scenario::{dynamic_motions, scenario1_grid, scenario2_set, ScenarioConfig};
pub use suite::{run_suite, SuiteOptions, SuiteResult, SuiteRun};
pub use workflow::{Artifacts, DemoSummary, ScenarioKind};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("bad report: {0}")]
    BadReport(String),
    #[error(transparent)]
    World(#[from] crate::world::WorldError),
    #[error(transparent)]
    Agent(#[from] crate::agent::AgentError),
    #[error(transparent)]
    Perception(#[from] crate::perception::PerceptionError),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
