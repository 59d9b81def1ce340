//! Measurement noise, self-supervised estimator fitting, and the running
//! position estimate the agent flies on.

pub mod dataset;
pub mod estimator;
pub mod noise;
pub mod table;

pub use dataset::{collect_training_set, drone_at, PoseSampler, TrainingSample};
pub use estimator::{
    commanded_velocity, estimate, fit_estimators, EstimatorModel, FitOptions, PositionEstimate, STALENESS_HORIZON,
};
pub use noise::{corrupt, NoiseModel};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PerceptionError {
    #[error("insufficient training data: {0}")]
    InsufficientData(String),
    #[error("degenerate {0} fit: normal equations are singular")]
    DegenerateFit(&'static str),
    #[error("landmark not visible and no prior estimate")]
    NoPriorEstimate,
    #[error("no visible pose after {0} tries")]
    NoVisiblePose(usize),
    #[error("bad estimator file: {0}")]
    BadFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PartialEq for PerceptionError {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}
