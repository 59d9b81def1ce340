//! Per-episode metrics, computed purely from a trajectory log.

use super::scenario::ScenarioConfig;
use crate::episode::EpisodeStatus;
use crate::runner::Trajectory;
use crate::world::MotionPattern;
use serde::{Deserialize, Serialize};

/// Aim-point error under which the drone counts as stabilized, meters.
pub const STABLE_ERROR: f64 = 0.10;
/// Dwell time the error must stay under [`STABLE_ERROR`], seconds.
pub const STABLE_DWELL: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionType {
    Linear,
    Rotational,
}

impl MotionType {
    pub fn label(self) -> &'static str {
        match self {
            MotionType::Linear => "Linear",
            MotionType::Rotational => "Rotational",
        }
    }
}

/// Motion type and speed (m/s for linear, degrees/s for rotational).
pub fn motion_descriptor(m: &MotionPattern) -> Option<(MotionType, f64)> {
    match *m {
        MotionPattern::Static => None,
        MotionPattern::Linear { speed, .. } => Some((MotionType::Linear, speed)),
        MotionPattern::Rotational { rate, .. } => Some((MotionType::Rotational, rate.to_degrees())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub test_case: u32,
    pub distance_m: f64,
    pub angle_deg: f64,
    /// Mean |estimated - true| altitude over the approach; NaN (null in
    /// JSON) when the landmark was never seen.
    #[serde(with = "nan_as_null")]
    pub altitude_error_cm: f64,
    /// Horizontal distance to the pad center at touchdown (or at episode end).
    pub lateral_displacement_cm: f64,
    pub time_to_land_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion_type: Option<MotionType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tracking_error_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_to_stabilize_s: Option<f64>,
    pub success: bool,
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

fn horizontal_error(s: &crate::runner::StepRecord) -> f64 {
    (s.state.position.x - s.pad_center.x).hypot(s.state.position.y - s.pad_center.y)
}

/// Mean absolute altitude estimation error over airborne ticks with an
/// estimate, meters. `None` if the landmark was never seen.
pub fn altitude_error(traj: &Trajectory) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    let init = &traj.initial;
    if let Some(e) = &init.estimate {
        sum += (e.altitude - init.truth.altitude).abs();
        n += 1;
    }
    for s in &traj.steps {
        if s.state.position.z > 0.0 {
            if let Some(e) = &s.estimate {
                sum += (e.altitude - s.truth.altitude).abs();
                n += 1;
            }
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Final horizontal distance to the pad center, meters.
pub fn final_displacement(traj: &Trajectory) -> f64 {
    match traj.status {
        EpisodeStatus::Landed { lateral_displacement } => lateral_displacement,
        _ => match traj.steps.last() {
            Some(s) => horizontal_error(s),
            None => (traj.initial.state.position.x - traj.initial.pad_center.x)
                .hypot(traj.initial.state.position.y - traj.initial.pad_center.y),
        },
    }
}

/// Index of the first tick of the descent phase: the first commanded land
/// flag, or the whole episode when landing was never commanded.
pub fn descent_start(traj: &Trajectory) -> usize {
    traj.steps.iter().position(|s| s.blended.land).unwrap_or(0)
}

/// Mean aim-point distance to the pad center over the descent phase, meters.
pub fn tracking_error(traj: &Trajectory) -> f64 {
    let d = &traj.steps[descent_start(traj).min(traj.steps.len())..];
    if d.is_empty() {
        return final_displacement(traj);
    }
    d.iter().map(horizontal_error).sum::<f64>() / d.len() as f64
}

/// First time the aim-point error stays under [`STABLE_ERROR`] for
/// [`STABLE_DWELL`] seconds; the episode duration when that never happens.
pub fn time_to_stabilize(traj: &Trajectory) -> f64 {
    let steps = &traj.steps;
    let end = traj.duration();
    let mut run_start: Option<usize> = None;
    for (i, s) in steps.iter().enumerate() {
        if horizontal_error(s) < STABLE_ERROR {
            let start = *run_start.get_or_insert(i);
            if s.t - steps[start].t >= STABLE_DWELL - 1e-9 {
                return steps[start].t;
            }
        } else {
            run_start = None;
        }
    }
    end
}

pub fn is_success(traj: &Trajectory) -> bool {
    matches!(traj.status, EpisodeStatus::Landed { lateral_displacement }
        if lateral_displacement <= traj.setup.scene.pad.radius)
}

pub fn compute_metrics(traj: &Trajectory, scenario: &ScenarioConfig) -> MetricsRecord {
    let motion = motion_descriptor(&scenario.pad_motion);
    MetricsRecord {
        test_case: scenario.id,
        distance_m: scenario.start_depth,
        angle_deg: scenario.start_bearing,
        altitude_error_cm: altitude_error(traj).unwrap_or(f64::NAN) * 100.0,
        lateral_displacement_cm: final_displacement(traj) * 100.0,
        time_to_land_s: traj.duration(),
        motion_type: motion.map(|m| m.0),
        speed: motion.map(|m| m.1),
        tracking_error_cm: motion.map(|_| tracking_error(traj) * 100.0),
        time_to_stabilize_s: motion.map(|_| time_to_stabilize(traj)),
        success: is_success(traj),
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Mean of repeated runs of one case. Success is the majority outcome.
pub fn aggregate(runs: &[MetricsRecord]) -> Option<MetricsRecord> {
    let first = runs.first()?;
    let opt_mean = |f: fn(&MetricsRecord) -> Option<f64>| {
        let v: Vec<f64> = runs.iter().filter_map(f).collect();
        (!v.is_empty()).then(|| mean(v.into_iter()))
    };
    let wins = runs.iter().filter(|r| r.success).count();
    Some(MetricsRecord {
        test_case: first.test_case,
        distance_m: first.distance_m,
        angle_deg: first.angle_deg,
        altitude_error_cm: mean(runs.iter().map(|r| r.altitude_error_cm)),
        lateral_displacement_cm: mean(runs.iter().map(|r| r.lateral_displacement_cm)),
        time_to_land_s: mean(runs.iter().map(|r| r.time_to_land_s)),
        motion_type: first.motion_type,
        speed: first.speed,
        tracking_error_cm: opt_mean(|r| r.tracking_error_cm),
        time_to_stabilize_s: opt_mean(|r| r.time_to_stabilize_s),
        success: 2 * wins > runs.len(),
    })
}
