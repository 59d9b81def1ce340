//! Flies a fixed command sequence through steady wind and prints the track,
//! then samples the moving-platform trajectories.

use monoland::world::*;
use nalgebra::{Vector2, Vector3};

fn main() -> Result<(), WorldError> {
    let cfg = WorldConfig::default();
    let wind = WindState::steady(0.3, -0.1);
    let mut s = DroneState::at(Vector3::new(-10.0, 0.0, 2.5));
    for k in 0..=60 {
        let cmd = if k < 40 {
            ControlCommand::new(1.5, 0.0, -0.02)
        } else {
            ControlCommand::new(0.5, 0.0, -0.5)
        };
        if k % 10 == 0 {
            println!(
                "t={:5.2}s  pos=({:6.2}, {:5.2}, {:4.2})  v=({:5.2}, {:5.2}, {:5.2})",
                s.time, s.position.x, s.position.y, s.position.z, s.velocity.x, s.velocity.y, s.velocity.z
            );
        }
        s = step(&s, &cmd, &wind, cfg.dt, &cfg)?;
    }

    let start = Vector3::zeros();
    let linear = MotionPattern::Linear {
        heading: Vector2::new(1.0, 0.0),
        speed: 1.0,
    };
    let rotational = MotionPattern::Rotational {
        center: Vector2::new(0.0, 3.0),
        rate: 10f64.to_radians(),
    };
    for t in [0.0, 3.0, 6.0, 9.0] {
        let l = platform_pose(&linear, start, t);
        let r = platform_pose(&rotational, start, t);
        println!("t={t:3.0}s  linear=({:5.2}, {:5.2})  rotational=({:5.2}, {:5.2})", l.x, l.y, r.x, r.y);
    }
    Ok(())
}
