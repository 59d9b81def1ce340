//! Starts the session server on a free port, connects as a raw TCP client,
//! steers for a while and prints the telemetry stream until touchdown.

use monoland::bridge::protocol::MetricsMessage;
use monoland::bridge::{spawn_server, Envelope, ServeOptions, SessionContext, Telemetry};
use monoland::harness::workflow::train_one;
use monoland::harness::HarnessConfig;
use serde_json::json;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::sync::Arc;

fn main() -> anyhow::Result<()> {
    let config = HarnessConfig::default();
    let model = Arc::new(config.fit_estimators()?);
    let policy = Arc::new(train_one(&config, model.clone(), 1)?);
    let ctx = Arc::new(SessionContext { config, policy, model });
    let addr = spawn_server(
        ctx,
        &ServeOptions {
            bind: "127.0.0.1:0".into(),
            tick_hz: 100.0,
        },
    )?;

    let mut w = TcpStream::connect(addr)?;
    let mut r = BufReader::new(w.try_clone()?);
    let mut send = |kind: &str, seq: u64, payload| writeln!(w, "{}", json!({"type": kind, "seq": seq, "payload": payload}));
    send("hello", 1, json!({"version": 1}))?;
    send("start", 2, json!({}))?;
    let mut seq = 3;

    let mut line = String::new();
    while r.read_line(&mut line)? > 0 {
        let e: Envelope = serde_json::from_str(&line)?;
        line.clear();
        match e.kind.as_str() {
            "telemetry" => {
                let t: Telemetry = e.payload_as()?;
                if t.step < 60 && t.step % 5 == 0 {
                    send("pilot_cmd", seq, json!({"vx": 0.8, "vy": 0.2, "vz": 0.0}))?;
                    seq += 1;
                }
                if t.step % 20 == 0 {
                    let p = t.drone.position;
                    println!(
                        "step {:3}  pos ({:6.2}, {:5.2}, {:4.2})  visible {:5}  alpha {:.2}",
                        t.step, p.x, p.y, p.z, t.observation.visible, t.command.alpha
                    );
                }
            }
            "metrics" => {
                let m: MetricsMessage = e.payload_as()?;
                println!("{:?} after {} steps: {:.2} cm from centre", m.status, m.steps, m.metrics.lateral_displacement_cm);
                break;
            }
            other => println!("{other}: {}", e.payload),
        }
    }
    Ok(())
}
