//! The static description of one landing setup: limits, camera, landmark
//! and pad. Ground-truth relative coordinates are measured in the approach
//! frame (depth along world `+x` toward the pad, lateral along world `+y`).

use crate::optics::{project_landmark, CameraIntrinsics, LandmarkObservation};
use crate::world::{DroneState, LandmarkConfig, PadConfig, WorldConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Scene {
    pub world: WorldConfig,
    pub camera: CameraIntrinsics,
    pub landmark: LandmarkConfig,
    pub pad: PadConfig,
}

/// Drone position relative to the pad, in the approach frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativePose {
    pub altitude: f64,
    /// Distance still to fly forward to be over the pad center.
    pub depth: f64,
    /// Signed offset to the left of the approach axis.
    pub lateral: f64,
}

impl RelativePose {
    pub fn horizontal_error(&self) -> f64 {
        self.depth.hypot(self.lateral)
    }
}

impl Scene {
    pub fn observe(&self, drone: &DroneState) -> LandmarkObservation {
        project_landmark(drone, &self.camera, &self.landmark, &self.pad)
    }

    pub fn truth(&self, drone: &DroneState) -> RelativePose {
        let c = self.pad.center_at(drone.time);
        RelativePose {
            altitude: drone.position.z,
            depth: c.x - drone.position.x,
            lateral: drone.position.y - c.y,
        }
    }
}
