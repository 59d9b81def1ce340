//! Wire messages. Every message is one JSON object per line (or per
//! WebSocket text frame) with the shape `{"type", "seq", "t", "payload"}`.

use crate::episode::EpisodeStatus;
use crate::harness::{MetricsRecord, ScenarioConfig};
use crate::optics::{ColorBand, Occlusion};
use crate::runner::StepRecord;
use crate::world::{ControlCommand, WindState};
use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const PROTOCOL_VERSION: u32 = 1;

pub const CAPABILITIES: [&str; 5] = ["telemetry", "pilot_cmd", "set_alpha_max", "metrics", "configure"];

pub const OUT_OF_BOUNDS: &str = "command out of bounds";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(rename = "type")]
    pub kind: String,
    pub seq: u64,
    /// Simulation time of the sender, seconds.
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub payload: Value,
}

impl Envelope {
    pub fn new<P: Serialize>(kind: &str, seq: u64, t: f64, payload: &P) -> Self {
        Self {
            kind: kind.to_string(),
            seq,
            t,
            payload: serde_json::to_value(payload).expect("payload serializes"),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("envelope serializes")
    }

    pub fn payload_as<P: for<'de> Deserialize<'de>>(&self) -> serde_json::Result<P> {
        serde_json::from_value(self.payload.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    pub version: u32,
    #[serde(default)]
    pub capabilities: Vec<String>,
}

/// Episode configuration applied at the next `start`. Absent fields keep
/// their current value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Configure {
    pub scenario: Option<ScenarioConfig>,
    pub seed: Option<u64>,
    pub alpha_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PilotCmd {
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub yaw_rate: f64,
    pub land: bool,
}

impl PilotCmd {
    pub fn command(&self) -> ControlCommand {
        ControlCommand {
            v_cmd: Vector3::new(self.vx, self.vy, self.vz),
            yaw_rate: self.yaw_rate,
            land: self.land,
        }
    }
}

impl From<&ControlCommand> for PilotCmd {
    fn from(c: &ControlCommand) -> Self {
        Self {
            vx: c.v_cmd.x,
            vy: c.v_cmd.y,
            vz: c.v_cmd.z,
            yaw_rate: c.yaw_rate,
            land: c.land,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetAlphaMax {
    pub alpha_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub message: String,
    /// Sequence number of the message that caused the error, when known.
    pub offending_seq: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneTelemetry {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub yaw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PadTelemetry {
    pub center: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub radius: f64,
}

/// Camera measurement; every field but `visible` is null when the landmark
/// is not seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationTelemetry {
    pub visible: bool,
    pub apparent_diameter_px: Option<f64>,
    pub viewing_angle: Option<f64>,
    pub color_band: Option<ColorBand>,
    pub ellipse_ratio: Option<f64>,
    pub centroid_px: Option<Vector2<f64>>,
    pub occlusion: Option<Occlusion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateTelemetry {
    pub altitude: f64,
    pub depth: f64,
    pub lateral: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommandTelemetry {
    pub ai: PilotCmd,
    pub human: Option<PilotCmd>,
    pub blended: PilotCmd,
    pub alpha: f64,
    pub conflict: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub step: usize,
    pub drone: DroneTelemetry,
    pub pad: PadTelemetry,
    pub observation: ObservationTelemetry,
    pub estimate: Option<EstimateTelemetry>,
    pub command: CommandTelemetry,
    /// Wind drift the pilot feels, m/s; the co-pilot never sees it.
    pub wind: Vector3<f64>,
    pub status: EpisodeStatus,
}

impl Telemetry {
    pub fn from_step(r: &StepRecord, pad_velocity: Vector3<f64>, pad_radius: f64, wind: &WindState) -> Self {
        let v = r.observation.view;
        Self {
            step: r.step,
            drone: DroneTelemetry {
                position: r.state.position,
                velocity: r.state.velocity,
                yaw: r.state.yaw,
            },
            pad: PadTelemetry {
                center: r.pad_center,
                velocity: pad_velocity,
                radius: pad_radius,
            },
            observation: ObservationTelemetry {
                visible: v.is_some(),
                apparent_diameter_px: v.map(|v| v.apparent_diameter_px),
                viewing_angle: v.map(|v| v.viewing_angle),
                color_band: v.map(|v| v.color_band),
                ellipse_ratio: v.map(|v| v.ellipse_ratio),
                centroid_px: v.map(|v| v.centroid_px),
                occlusion: r.observation.occlusion,
            },
            estimate: r.estimate.map(|e| EstimateTelemetry {
                altitude: e.altitude,
                depth: e.depth,
                lateral: e.lateral_offset,
                confidence: e.confidence,
            }),
            command: CommandTelemetry {
                ai: (&r.ai).into(),
                human: r.human.as_ref().map(PilotCmd::from),
                blended: (&r.blended).into(),
                alpha: r.alpha,
                conflict: r.conflict,
            },
            wind: wind.drift(r.t),
            status: r.status,
        }
    }
}

/// End-of-episode summary sent once when the episode reaches a terminal status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsMessage {
    pub status: EpisodeStatus,
    pub steps: usize,
    pub metrics: MetricsRecord,
}

/// Best-effort `seq` of a line that failed to parse as an envelope.
pub fn salvage_seq(line: &str) -> Option<u64> {
    if let Ok(v) = serde_json::from_str::<Value>(line) {
        return v.get("seq").and_then(Value::as_u64);
    }
    let i = line.find("\"seq\"")? + 5;
    let rest = line[i..].trim_start().strip_prefix(':')?.trim_start();
    let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    rest[..end].parse().ok()
}
