//! monoland — monocular-vision UAV landing on a lenticular landmark.
//!
//! The crate is organized bottom-up:
//!
//! - [`world`]: deterministic kinematic simulation (drone, pad, platform motion, wind).
//! - [`optics`]: pinhole front camera and exact projection of the lenticular disc.
//! - [`perception`]: measurement noise, learned altitude/depth tables, dead reckoning.
//! - [`agent`]: the landing environment and a tabular Q-learning controller.
//! - [`shared`]: pilot models, intent prediction and human/AI command blending.
//! - [`harness`]: experiment scenarios, metrics and report emission.
//! - [`bridge`]: a live session server speaking newline-delimited JSON.
//!
//! Runnable examples for each capability live in `crates/core/examples/`.

pub mod agent;
pub mod bridge;
pub mod episode;
pub mod harness;
pub mod optics;
pub mod perception;
pub mod runner;
pub mod scene;
pub mod shared;
pub mod world;

pub use scene::{RelativePose, Scene};
