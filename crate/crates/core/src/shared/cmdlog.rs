//! Timestamped pilot command logs with zero-order-hold playback.

use super::SharedError;
use crate::world::ControlCommand;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// A held command older than this is replaced by neutral, seconds.
pub const HOLD_STALENESS: f64 = 0.5;
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoggedCommand {
    pub t: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub yaw_rate: f64,
    pub land: bool,
}

impl LoggedCommand {
    pub fn new(t: f64, c: &ControlCommand) -> Self {
        Self {
            t,
            vx: c.v_cmd.x,
            vy: c.v_cmd.y,
            vz: c.v_cmd.z,
            yaw_rate: c.yaw_rate,
            land: c.land,
        }
    }

    pub fn command(&self) -> ControlCommand {
        ControlCommand {
            v_cmd: Vector3::new(self.vx, self.vy, self.vz),
            yaw_rate: self.yaw_rate,
            land: self.land,
        }
    }
}

/// Commands sorted by time. Several entries may share a timestamp; the last
/// one wins.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CommandLog {
    pub entries: Vec<LoggedCommand>,
}

impl CommandLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a command; timestamps must not go backwards.
    pub fn push(&mut self, t: f64, cmd: &ControlCommand) -> Result<(), SharedError> {
        if let Some(last) = self.entries.last() {
            if t + TIME_EPS < last.t {
                return Err(SharedError::BadLog(format!("timestamp {t} precedes {}", last.t)));
            }
        }
        self.entries.push(LoggedCommand::new(t, cmd));
        Ok(())
    }

    /// Command held at time `t`: the latest entry at or before `t`, or
    /// neutral when there is none or it is older than [`HOLD_STALENESS`].
    pub fn held_at(&self, t: f64) -> ControlCommand {
        let idx = self.entries.partition_point(|e| e.t <= t + TIME_EPS);
        match idx.checked_sub(1).map(|i| &self.entries[i]) {
            Some(e) if t - e.t <= HOLD_STALENESS + TIME_EPS => e.command(),
            _ => ControlCommand::hover(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SharedError> {
        let mut out = csv::Writer::from_writer(w);
        for e in &self.entries {
            out.serialize(e)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, SharedError> {
        let mut rd = csv::Reader::from_reader(r);
        let mut log = Self::new();
        for row in rd.deserialize() {
            let e: LoggedCommand = row?;
            log.push(e.t, &e.command())?;
        }
        Ok(log)
    }

    /// Per-episode command sequences for intent fitting.
    pub fn commands(&self) -> Vec<ControlCommand> {
        self.entries.iter().map(|e| e.command()).collect()
    }
}
