//! Shared autonomy: scripted pilots, a learned model of pilot intent, and
//! the arbitration that blends pilot and co-pilot commands.

pub mod arbitration;
pub mod cmdlog;
pub mod intent;
pub mod pilot;

pub use arbitration::{arbitrate, blend, conflict, BlendedCommand, DEFAULT_ALPHA_MAX};
pub use cmdlog::{CommandLog, LoggedCommand, HOLD_STALENESS};
pub use intent::{fit_intent, IntentModel};
pub use pilot::{pilot_command, PilotGains, PilotKind, PilotModel, PilotView};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SharedError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("bad command log: {0}")]
    BadLog(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
