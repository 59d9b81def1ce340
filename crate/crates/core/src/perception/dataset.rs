//! Self-labeled training data: poses are drawn, observed through the
//! simulator, and labeled with the simulator's own ground truth.

use super::noise::{corrupt, NoiseModel};
use super::PerceptionError;
use crate::optics::LandmarkView;
use crate::scene::{RelativePose, Scene};
use crate::world::DroneState;
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Attempts allowed per requested sample before giving up.
pub const MAX_TRIES_PER_SAMPLE: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PoseSampler {
    /// Uniform over depth (along the approach axis), altitude and bearing.
    Uniform {
        depth: [f64; 2],
        altitude: [f64; 2],
        bearing_deg: [f64; 2],
    },
    /// Cycles through fixed drone positions relative to the pad.
    Fixed(Vec<RelativePose>),
}

impl Default for PoseSampler {
    fn default() -> Self {
        PoseSampler::Uniform {
            depth: [-0.5, 20.0],
            altitude: [0.05, 10.0],
            bearing_deg: [-35.0, 35.0],
        }
    }
}

impl PoseSampler {
    fn draw<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> RelativePose {
        match self {
            PoseSampler::Uniform {
                depth,
                altitude,
                bearing_deg,
            } => {
                let d = rng.random_range(depth[0]..=depth[1]);
                let a = rng.random_range(altitude[0]..=altitude[1]);
                let b = rng.random_range(bearing_deg[0]..=bearing_deg[1]).to_radians();
                RelativePose {
                    altitude: a,
                    depth: d,
                    lateral: d * b.tan(),
                }
            }
            PoseSampler::Fixed(poses) => poses[k % poses.len()],
        }
    }
}

/// Places a drone (facing down the approach axis) at a relative pose.
pub fn drone_at(scene: &Scene, pose: &RelativePose, time: f64) -> DroneState {
    let c = scene.pad.center_at(time);
    let mut s = DroneState::at(Vector3::new(c.x - pose.depth, c.y + pose.lateral, pose.altitude));
    s.time = time;
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub view: LandmarkView,
    pub truth: RelativePose,
}

pub fn collect_training_set(
    scene: &Scene,
    sampler: &PoseSampler,
    noise: &NoiseModel,
    n: usize,
    seed: u64,
) -> Result<Vec<TrainingSample>, PerceptionError> {
    if n == 0 {
        return Err(PerceptionError::InsufficientData("requested zero samples".into()));
    }
    let mut pose_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed ^ noise.seed.rotate_left(17) ^ 0x5eed_0f_1a);
    let mut out = Vec::with_capacity(n);
    let mut draws = 0usize;
    while out.len() < n {
        let mut tries = 0;
        loop {
            if tries >= MAX_TRIES_PER_SAMPLE {
                return Err(PerceptionError::NoVisiblePose(tries));
            }
            tries += 1;
            let pose = sampler.draw(draws, &mut pose_rng);
            draws += 1;
            let drone = drone_at(scene, &pose, 0.0);
            let obs = corrupt(&scene.observe(&drone), noise, &scene.landmark, &mut noise_rng);
            if let Some(view) = obs.view {
                out.push(TrainingSample {
                    view,
                    truth: scene.truth(&drone),
                });
                break;
            }
        }
    }
    Ok(out)
}
