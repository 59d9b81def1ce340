//! Learned altitude/depth estimators and the per-track position estimate.
//!
//! Altitude is read from the apparent diameter D1, conditioned on the image
//! row of the disc (the elevation of the ray to it). Depth is read from the
//! viewing angle theta together with D1. Both maps are bilinear tables
//! fitted to simulator ground truth; lateral offset then follows from the
//! horizontal bearing of the disc centroid and the estimated depth.

use super::dataset::TrainingSample;
use super::table::{BilinearTable, KnotAxis, Warp};
use super::PerceptionError;
use crate::optics::{CameraIntrinsics, LandmarkObservation, LandmarkView};
use crate::world::{ControlCommand, WorldConfig};
use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const MAGIC: &[u8; 4] = b"LLEM";
pub const FORMAT_VERSION: u16 = 1;

/// Minimum training set accepted by [`fit_estimators`].
pub const MIN_SAMPLES: usize = 50;
pub const MIN_DISTINCT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub knots: usize,
    pub smoothing: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            knots: 32,
            smoothing: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorModel {
    pub camera: CameraIntrinsics,
    /// Landmark distance behind the pad, used to turn bearing into lateral offset.
    pub landmark_offset: f64,
    /// (D1, ray elevation) -> altitude.
    pub altitude_table: BilinearTable,
    /// (theta, D1) -> depth.
    pub depth_table: BilinearTable,
    pub training_sample_count: u64,
    /// Altitude RMS residual over the training set, meters.
    pub fit_residual_rms: f64,
    /// Depth RMS residual over the training set, meters.
    pub depth_residual_rms: f64,
    /// Knot cells that had no data and were filled by the smoothness prior.
    pub degenerate_cells: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionEstimate {
    pub altitude: f64,
    pub depth: f64,
    pub lateral_offset: f64,
    pub confidence: f64,
    /// Seconds since the last visible observation.
    pub stale_for: f64,
    /// The last table lookup fell outside the training hull.
    pub extrapolated: bool,
}

/// Staleness horizon at which confidence reaches zero, seconds.
pub const STALENESS_HORIZON: f64 = 1.0;

pub fn ray_elevation(cam: &CameraIntrinsics, centroid: &Vector2<f64>) -> f64 {
    cam.pixel_ray_body(centroid).z.clamp(-1.0, 1.0).asin()
}

pub fn ray_bearing(cam: &CameraIntrinsics, centroid: &Vector2<f64>) -> f64 {
    let r = cam.pixel_ray_body(centroid);
    r.y.atan2(r.x)
}

fn count_distinct(mut xs: Vec<f64>) -> usize {
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    xs.len()
}

pub fn fit_estimators(
    samples: &[TrainingSample],
    camera: &CameraIntrinsics,
    landmark_offset: f64,
    opts: &FitOptions,
) -> Result<EstimatorModel, PerceptionError> {
    if samples.len() < MIN_SAMPLES {
        return Err(PerceptionError::InsufficientData(format!(
            "{} samples, need at least {MIN_SAMPLES}",
            samples.len()
        )));
    }
    let diameters = count_distinct(samples.iter().map(|s| s.view.apparent_diameter_px).collect());
    let angles = count_distinct(samples.iter().map(|s| s.view.viewing_angle).collect());
    if diameters < MIN_DISTINCT || angles < MIN_DISTINCT {
        return Err(PerceptionError::InsufficientData(format!(
            "{diameters} distinct diameters and {angles} distinct angles, need {MIN_DISTINCT} of each"
        )));
    }

    let alt_rows: Vec<(f64, f64, f64)> = samples
        .iter()
        .map(|s| {
            (
                s.view.apparent_diameter_px,
                ray_elevation(camera, &s.view.centroid_px),
                s.truth.altitude,
            )
        })
        .collect();
    let depth_rows: Vec<(f64, f64, f64)> = samples
        .iter()
        .map(|s| (s.view.viewing_angle, s.view.apparent_diameter_px, s.truth.depth))
        .collect();

    let k = opts.knots;
    let alt_axes = [
        KnotAxis::spanning(Warp::Reciprocal, k, alt_rows.iter().map(|r| r.0)),
        KnotAxis::spanning(Warp::Sine, k, alt_rows.iter().map(|r| r.1)),
    ];
    let depth_axes = [
        KnotAxis::spanning(Warp::Cosine, k, depth_rows.iter().map(|r| r.0)),
        KnotAxis::spanning(Warp::Reciprocal, k, depth_rows.iter().map(|r| r.1)),
    ];
    let (altitude_table, alt_fit) =
        BilinearTable::fit(alt_axes, &alt_rows, opts.smoothing).ok_or(PerceptionError::DegenerateFit("altitude"))?;
    let (depth_table, depth_fit) =
        BilinearTable::fit(depth_axes, &depth_rows, opts.smoothing).ok_or(PerceptionError::DegenerateFit("depth"))?;

    Ok(EstimatorModel {
        camera: *camera,
        landmark_offset,
        altitude_table,
        depth_table,
        training_sample_count: samples.len() as u64,
        fit_residual_rms: alt_fit.rms,
        depth_residual_rms: depth_fit.rms,
        degenerate_cells: (alt_fit.empty_cells + depth_fit.empty_cells) as u32,
    })
}

impl EstimatorModel {
    /// Altitude, depth and lateral offset read from one visible view.
    pub fn measure(&self, view: &LandmarkView) -> PositionEstimate {
        let elevation = ray_elevation(&self.camera, &view.centroid_px);
        let (altitude, out_a) = self.altitude_table.eval(view.apparent_diameter_px, elevation);
        let (depth, out_d) = self.depth_table.eval(view.viewing_angle, view.apparent_diameter_px);
        let bearing = ray_bearing(&self.camera, &view.centroid_px);
        PositionEstimate {
            altitude: altitude.max(0.0),
            depth,
            lateral_offset: -(depth + self.landmark_offset) * bearing.tan(),
            confidence: 1.0,
            stale_for: 0.0,
            extrapolated: out_a || out_d,
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        let c = &self.camera;
        for v in [c.focal_px, c.image_width, c.image_height, c.mount_pitch, self.landmark_offset] {
            w.write_all(&v.to_le_bytes())?;
        }
        for table in [&self.altitude_table, &self.depth_table] {
            for axis in &table.axes {
                w.write_all(&[axis.warp.code()])?;
                w.write_all(&(axis.knots as u32).to_le_bytes())?;
                w.write_all(&axis.lo.to_le_bytes())?;
                w.write_all(&axis.hi.to_le_bytes())?;
            }
            for v in &table.values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.write_all(&self.training_sample_count.to_le_bytes())?;
        w.write_all(&self.fit_residual_rms.to_le_bytes())?;
        w.write_all(&self.depth_residual_rms.to_le_bytes())?;
        w.write_all(&self.degenerate_cells.to_le_bytes())?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, PerceptionError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(PerceptionError::BadFormat("bad magic".into()));
        }
        let version = read_u16(r)?;
        if version != FORMAT_VERSION {
            return Err(PerceptionError::BadFormat(format!("unsupported version {version}")));
        }
        let camera = CameraIntrinsics {
            focal_px: read_f64(r)?,
            image_width: read_f64(r)?,
            image_height: read_f64(r)?,
            mount_pitch: read_f64(r)?,
        };
        let landmark_offset = read_f64(r)?;
        let mut tables = Vec::with_capacity(2);
        for _ in 0..2 {
            let mut axes = Vec::with_capacity(2);
            for _ in 0..2 {
                let mut code = [0u8; 1];
                r.read_exact(&mut code)?;
                let warp = Warp::from_code(code[0]).ok_or_else(|| PerceptionError::BadFormat("bad warp code".into()))?;
                let knots = read_u32(r)? as usize;
                if !(2..=4096).contains(&knots) {
                    return Err(PerceptionError::BadFormat(format!("bad knot count {knots}")));
                }
                axes.push(KnotAxis {
                    warp,
                    knots,
                    lo: read_f64(r)?,
                    hi: read_f64(r)?,
                });
            }
            let n = axes[0].knots * axes[1].knots;
            let values = (0..n).map(|_| read_f64(r)).collect::<Result<Vec<_>, _>>()?;
            tables.push(BilinearTable {
                axes: [axes[0], axes[1]],
                values,
            });
        }
        let depth_table = tables.pop().expect("two tables");
        let altitude_table = tables.pop().expect("two tables");
        Ok(Self {
            camera,
            landmark_offset,
            altitude_table,
            depth_table,
            training_sample_count: read_u64(r)?,
            fit_residual_rms: read_f64(r)?,
            depth_residual_rms: read_f64(r)?,
            degenerate_cells: read_u32(r)?,
        })
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self, PerceptionError> {
        Self::read_from(&mut bytes)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), PerceptionError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, PerceptionError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn read_f64<R: Read>(r: &mut R) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u16<R: Read>(r: &mut R) -> std::io::Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

/// Body-frame velocity actually flown for a command (after the speed clamp).
pub fn commanded_velocity(cmd: &ControlCommand, cfg: &WorldConfig) -> Vector3<f64> {
    let v = cmd.v_cmd;
    let n = v.norm();
    if n > cfg.v_max {
        v * (cfg.v_max / n)
    } else {
        v
    }
}

/// Updates the position estimate from one observation.
///
/// When the landmark is not visible the previous estimate is propagated
/// with `last_velocity` (body frame, m/s) and its confidence decays
/// linearly to zero over [`STALENESS_HORIZON`].
pub fn estimate(
    obs: &LandmarkObservation,
    model: &EstimatorModel,
    prev: Option<&PositionEstimate>,
    last_velocity: &Vector3<f64>,
    dt: f64,
) -> Result<PositionEstimate, PerceptionError> {
    if let Some(view) = &obs.view {
        return Ok(model.measure(view));
    }
    let prev = prev.ok_or(PerceptionError::NoPriorEstimate)?;
    let stale_for = prev.stale_for + dt;
    Ok(PositionEstimate {
        altitude: (prev.altitude + last_velocity.z * dt).max(0.0),
        depth: prev.depth - last_velocity.x * dt,
        lateral_offset: prev.lateral_offset + last_velocity.y * dt,
        confidence: (1.0 - stale_for / STALENESS_HORIZON).clamp(0.0, 1.0),
        stale_for,
        extrapolated: prev.extrapolated,
    })
}
