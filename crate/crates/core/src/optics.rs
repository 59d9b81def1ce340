//! Pinhole front camera and exact projection of the lenticular disc.
//!
//! Camera frame: `x` along the optical axis, `y` left, `z` up. The camera is
//! mounted at the drone origin and pitched down by `mount_pitch` about the
//! body `y` axis. Image `u` grows to the right, `v` grows downward, and the
//! principal point is the image center.

use crate::world::{world_to_body, DroneState, LandmarkConfig, PadConfig};
use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OpticsError {
    #[error("viewing angle {0} rad outside [0, pi/2]")]
    AngleOutOfRange(f64),
    #[error("altitude {altitude} m is below the landmark height {height} m")]
    BelowLandmark { altitude: f64, height: f64 },
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraIntrinsics {
    pub focal_px: f64,
    pub image_width: f64,
    pub image_height: f64,
    /// Downward pitch of the optical axis relative to body forward, radians.
    pub mount_pitch: f64,
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self {
            focal_px: 800.0,
            image_width: 960.0,
            image_height: 720.0,
            mount_pitch: 0.0,
        }
    }
}

impl CameraIntrinsics {
    /// Intrinsics with the given vertical field of view and a 4:3 image.
    pub fn with_vertical_fov(focal_px: f64, vfov: f64) -> Self {
        let h = 2.0 * focal_px * (vfov / 2.0).tan();
        Self {
            focal_px,
            image_width: h * 4.0 / 3.0,
            image_height: h,
            mount_pitch: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), OpticsError> {
        if !(self.focal_px > 0.0) || !(self.image_width > 0.0) || !(self.image_height > 0.0) {
            return Err(OpticsError::InvalidCamera("focal and image size must be > 0".into()));
        }
        for fov in [self.horizontal_fov(), self.vertical_fov()] {
            if !(fov > 0.0 && fov < std::f64::consts::PI) {
                return Err(OpticsError::InvalidCamera("field of view must lie in (0, pi)".into()));
            }
        }
        if !self.mount_pitch.is_finite() {
            return Err(OpticsError::InvalidCamera("mount pitch must be finite".into()));
        }
        Ok(())
    }

    pub fn horizontal_fov(&self) -> f64 {
        2.0 * (self.image_width / 2.0 / self.focal_px).atan()
    }

    pub fn vertical_fov(&self) -> f64 {
        2.0 * (self.image_height / 2.0 / self.focal_px).atan()
    }

    pub fn principal_point(&self) -> Vector2<f64> {
        Vector2::new(self.image_width / 2.0, self.image_height / 2.0)
    }

    pub fn body_to_camera(&self, v: &Vector3<f64>) -> Vector3<f64> {
        let (s, c) = self.mount_pitch.sin_cos();
        Vector3::new(c * v.x - s * v.z, v.y, s * v.x + c * v.z)
    }

    pub fn camera_to_body(&self, v: &Vector3<f64>) -> Vector3<f64> {
        let (s, c) = self.mount_pitch.sin_cos();
        Vector3::new(c * v.x + s * v.z, v.y, -s * v.x + c * v.z)
    }

    /// Pixel of a camera-frame point in front of the camera.
    pub fn project(&self, p: &Vector3<f64>) -> Vector2<f64> {
        let pp = self.principal_point();
        Vector2::new(pp.x - self.focal_px * p.y / p.x, pp.y - self.focal_px * p.z / p.x)
    }

    /// Unit body-frame direction of the ray through pixel `px`.
    pub fn pixel_ray_body(&self, px: &Vector2<f64>) -> Vector3<f64> {
        let pp = self.principal_point();
        let ray = Vector3::new(1.0, -(px.x - pp.x) / self.focal_px, -(px.y - pp.y) / self.focal_px);
        self.camera_to_body(&ray).normalize()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ColorBand {
    A,
    B,
    C,
}

impl ColorBand {
    pub const ALL: [ColorBand; 3] = [ColorBand::A, ColorBand::B, ColorBand::C];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Why the landmark was not seen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Occlusion {
    BehindCamera,
    BackFacing,
    /// Center projects below the bottom image edge: the near-pad blind area.
    BelowFrame,
    AboveFrame,
    SideOfFrame,
    /// Center is in frame but the disc is cut by an image edge.
    Clipped,
    /// Removed by the noise model.
    Dropout,
}

/// What the camera measures of a visible disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandmarkView {
    /// Major axis of the projected ellipse (D1), pixels.
    pub apparent_diameter_px: f64,
    /// Angle between the camera ray and the disc normal (theta), radians.
    pub viewing_angle: f64,
    pub color_band: ColorBand,
    /// Minor/major axis ratio.
    pub ellipse_ratio: f64,
    pub centroid_px: Vector2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandmarkObservation {
    pub view: Option<LandmarkView>,
    pub occlusion: Option<Occlusion>,
}

impl LandmarkObservation {
    pub fn visible(view: LandmarkView) -> Self {
        Self {
            view: Some(view),
            occlusion: None,
        }
    }

    pub fn hidden(reason: Occlusion) -> Self {
        Self {
            view: None,
            occlusion: Some(reason),
        }
    }

    pub fn is_visible(&self) -> bool {
        self.view.is_some()
    }
}

pub fn color_band(viewing_angle: f64, lm: &LandmarkConfig) -> Result<ColorBand, OpticsError> {
    if !(0.0..=FRAC_PI_2).contains(&viewing_angle) {
        return Err(OpticsError::AngleOutOfRange(viewing_angle));
    }
    Ok(if viewing_angle < lm.band_edges[0] {
        ColorBand::A
    } else if viewing_angle < lm.band_edges[1] {
        ColorBand::B
    } else {
        ColorBand::C
    })
}

/// Synthesizes the front camera's measurement of the landmark.
pub fn project_landmark(
    drone: &DroneState,
    cam: &CameraIntrinsics,
    lm: &LandmarkConfig,
    pad: &PadConfig,
) -> LandmarkObservation {
    let center = lm.center(pad.center_at(drone.time));
    let rel_world = center - drone.position;
    let p = cam.body_to_camera(&world_to_body(&rel_world, drone.yaw));
    if p.x <= 0.0 {
        return LandmarkObservation::hidden(Occlusion::BehindCamera);
    }
    let range = rel_world.norm();
    let to_camera = -rel_world / range;
    let cos_theta = lm.normal().dot(&to_camera);
    if cos_theta <= 0.0 {
        return LandmarkObservation::hidden(Occlusion::BackFacing);
    }

    let px = cam.project(&p);
    if px.y > cam.image_height {
        return LandmarkObservation::hidden(Occlusion::BelowFrame);
    }
    if px.y < 0.0 {
        return LandmarkObservation::hidden(Occlusion::AboveFrame);
    }
    if px.x < 0.0 || px.x > cam.image_width {
        return LandmarkObservation::hidden(Occlusion::SideOfFrame);
    }
    let d1 = cam.focal_px * lm.diameter / range;
    let half = d1 / 2.0;
    if px.x - half < 0.0 || px.x + half > cam.image_width || px.y - half < 0.0 || px.y + half > cam.image_height {
        return LandmarkObservation::hidden(Occlusion::Clipped);
    }

    let cos_theta = cos_theta.min(1.0);
    let theta = cos_theta.acos();
    LandmarkObservation::visible(LandmarkView {
        apparent_diameter_px: d1,
        viewing_angle: theta,
        // theta is in [0, pi/2) here, so the band lookup cannot fail.
        color_band: color_band(theta, lm).unwrap_or(ColorBand::C),
        ellipse_ratio: cos_theta,
        centroid_px: px,
    })
}

/// Horizontal distance (along the line of sight, in front of the drone)
/// below which the landmark center drops out of the bottom of the image.
pub fn blind_region_boundary(cam: &CameraIntrinsics, lm: &LandmarkConfig, altitude: f64) -> Result<f64, OpticsError> {
    if altitude < lm.height {
        return Err(OpticsError::BelowLandmark {
            altitude,
            height: lm.height,
        });
    }
    let lower_edge = cam.mount_pitch + cam.vertical_fov() / 2.0;
    if altitude == lm.height || lower_edge >= FRAC_PI_2 {
        return Ok(0.0);
    }
    Ok((altitude - lm.height) / lower_edge.tan())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::LandmarkConfig;

    fn head_on(range: f64) -> (DroneState, LandmarkConfig, PadConfig) {
        let lm = LandmarkConfig::default();
        let pad = PadConfig::default();
        let c = lm.center(pad.center);
        (DroneState::at(Vector3::new(c.x - range, 0.0, c.z)), lm, pad)
    }

    #[test]
    fn head_on_projection() {
        let (drone, lm, pad) = head_on(10.0);
        let obs = project_landmark(&drone, &CameraIntrinsics::default(), &lm, &pad);
        let v = obs.view.expect("visible");
        assert!((v.apparent_diameter_px - 40.0).abs() < 1e-9);
        assert!((v.ellipse_ratio - 1.0).abs() < 1e-12);
        assert!(v.viewing_angle.abs() < 1e-6);
        assert_eq!(v.color_band, ColorBand::A);
        assert!((v.centroid_px - Vector2::new(480.0, 360.0)).norm() < 1e-9);
    }

    #[test]
    fn behind_camera_is_invisible() {
        let (mut drone, lm, pad) = head_on(10.0);
        drone.yaw = std::f64::consts::PI;
        let obs = project_landmark(&drone, &CameraIntrinsics::default(), &lm, &pad);
        assert_eq!(obs.occlusion, Some(Occlusion::BehindCamera));
    }

    #[test]
    fn back_face_is_invisible() {
        let lm = LandmarkConfig::default();
        let pad = PadConfig::default();
        let mut drone = DroneState::at(Vector3::new(5.0, 0.0, 0.5));
        drone.yaw = std::f64::consts::PI;
        let obs = project_landmark(&drone, &CameraIntrinsics::default(), &lm, &pad);
        assert_eq!(obs.occlusion, Some(Occlusion::BackFacing));
    }

    #[test]
    fn near_pad_blind_area() {
        // Landmark on the ground, drone 1 m in front of it and 2 m up.
        let lm = LandmarkConfig {
            height: 1e-9,
            ..LandmarkConfig::default()
        };
        let pad = PadConfig::default();
        let cam = CameraIntrinsics::with_vertical_fov(800.0, 60f64.to_radians());
        let drone = DroneState::at(Vector3::new(0.0, 0.0, 2.0));
        let depression = (2.0f64).atan2(1.0).to_degrees();
        assert!(depression > 63.0 && depression > 30.0);
        let obs = project_landmark(&drone, &cam, &lm, &pad);
        assert_eq!(obs.occlusion, Some(Occlusion::BelowFrame));
    }

    #[test]
    fn color_band_examples() {
        let lm = LandmarkConfig::default();
        assert_eq!(color_band(0.0, &lm).unwrap(), ColorBand::A);
        assert_eq!(color_band(20f64.to_radians(), &lm).unwrap(), ColorBand::B);
        assert_eq!(color_band(40f64.to_radians(), &lm).unwrap(), ColorBand::C);
        assert_eq!(color_band(12f64.to_radians(), &lm).unwrap(), ColorBand::B);
        assert!(color_band(-0.1, &lm).is_err());
        assert!(color_band(1.6, &lm).is_err());
    }

    #[test]
    fn blind_boundary_examples() {
        let lm = LandmarkConfig::default();
        let cam = CameraIntrinsics::with_vertical_fov(800.0, 60f64.to_radians());
        let r = blind_region_boundary(&cam, &lm, 2.5).unwrap();
        let oracle = 2.0 / (30f64.to_radians()).tan();
        assert!((r - oracle).abs() < 1e-9);
        assert!((r - 3.464).abs() < 1e-3);
        assert_eq!(blind_region_boundary(&cam, &lm, 0.5).unwrap(), 0.0);
        let wide = CameraIntrinsics::with_vertical_fov(800.0, 178f64.to_radians());
        assert!(blind_region_boundary(&wide, &lm, 2.5).unwrap() < 0.04);
        assert!(blind_region_boundary(&cam, &lm, 0.2).is_err());
        let tilted = CameraIntrinsics {
            mount_pitch: 1.3,
            ..cam
        };
        assert_eq!(blind_region_boundary(&tilted, &lm, 2.5).unwrap(), 0.0);
    }

    #[test]
    fn camera_rotation_roundtrip() {
        let cam = CameraIntrinsics {
            mount_pitch: 0.3,
            ..CameraIntrinsics::default()
        };
        let v = Vector3::new(1.0, -2.0, 0.5);
        assert!((cam.camera_to_body(&cam.body_to_camera(&v)) - v).norm() < 1e-12);
        let p = cam.body_to_camera(&Vector3::new(4.0, 0.7, -1.1));
        let ray = cam.pixel_ray_body(&cam.project(&p));
        assert!((ray - Vector3::new(4.0, 0.7, -1.1).normalize()).norm() < 1e-12);
    }

    #[test]
    fn default_fov() {
        let cam = CameraIntrinsics::default();
        assert!(cam.validate().is_ok());
        assert!((cam.vertical_fov().to_degrees() - 48.455).abs() < 1e-2);
        let bad = CameraIntrinsics {
            focal_px: 0.0,
            ..cam
        };
        assert!(bad.validate().is_err());
    }
}
