//! The discrete action set: hover, the 26 other body-velocity directions in
//! {-1, 0, +1}^3 scaled by a speed, and LAND.

use crate::world::{ControlCommand, WorldConfig};
use serde::{Deserialize, Serialize};

pub const NUM_ACTIONS: usize = 28;
pub const HOVER: usize = 0;
pub const LAND: usize = 27;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActionSpec {
    /// Speed per axis for velocity actions, m/s.
    pub speed_scale: f64,
    /// Descent rate while LAND is commanded, m/s.
    pub land_descent: f64,
    /// A velocity action is held until the encoded state changes, for at
    /// most this many ticks.
    pub max_hold: u32,
}

impl Default for ActionSpec {
    fn default() -> Self {
        Self {
            speed_scale: 1.0,
            land_descent: 0.4,
            max_hold: 10,
        }
    }
}

/// Direction of velocity action `a` (`a < LAND`).
pub fn direction(a: usize) -> [i8; 3] {
    assert!(a < LAND, "action {a} is not a velocity action");
    if a == HOVER {
        return [0, 0, 0];
    }
    // Enumerate {-1,0,1}^3 in lexicographic order, skipping the zero vector.
    let mut k = 0;
    for x in -1..=1i8 {
        for y in -1..=1i8 {
            for z in -1..=1i8 {
                if x == 0 && y == 0 && z == 0 {
                    continue;
                }
                k += 1;
                if k == a {
                    return [x, y, z];
                }
            }
        }
    }
    unreachable!()
}

impl ActionSpec {
    pub fn is_valid(&self, cfg: &WorldConfig) -> bool {
        self.speed_scale > 0.0
            && self.speed_scale <= cfg.v_max
            && self.land_descent > 0.0
            && self.land_descent <= cfg.v_land_max
    }

    pub fn command(&self, a: usize) -> ControlCommand {
        if a == LAND {
            return ControlCommand {
                land: true,
                ..ControlCommand::new(0.0, 0.0, -self.land_descent)
            };
        }
        let d = direction(a);
        let s = self.speed_scale;
        ControlCommand::new(d[0] as f64 * s, d[1] as f64 * s, d[2] as f64 * s)
    }
}
