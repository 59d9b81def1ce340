//! One live session: a transport-free state machine. Incoming lines are
//! applied between ticks; each tick produces one telemetry message.

use super::protocol::*;
use crate::agent::PolicySnapshot;
use crate::harness::{compute_metrics, HarnessConfig, ScenarioConfig};
use crate::perception::EstimatorModel;
use crate::runner::{Assist, HumanInput, Runner};
use crate::shared::CommandLog;
use crate::world::platform_velocity;
use serde::Serialize;
use std::sync::Arc;

/// Read-only resources shared by every session of a server.
#[derive(Debug, Clone)]
pub struct SessionContext {
    pub config: HarnessConfig,
    pub policy: Arc<PolicySnapshot>,
    pub model: Arc<EstimatorModel>,
}

pub struct Session {
    ctx: Arc<SessionContext>,
    next_seq: u64,
    last_in_seq: Option<u64>,
    greeted: bool,
    closing: bool,
    scenario: ScenarioConfig,
    seed: u64,
    alpha_max: f64,
    runner: Option<Runner>,
    running: bool,
}

impl Session {
    /// The default episode is the first static case with its first repeat seed.
    pub fn new(ctx: Arc<SessionContext>) -> Self {
        let scenario = ctx.config.static_scenarios().remove(0);
        Self {
            seed: scenario.repeat_seed(0),
            alpha_max: ctx.config.blend.alpha_max,
            scenario,
            ctx,
            next_seq: 1,
            last_in_seq: None,
            greeted: false,
            closing: false,
            runner: None,
            running: false,
        }
    }

    /// Set after a fatal protocol error; the transport should close once
    /// the pending replies are sent.
    pub fn is_closing(&self) -> bool {
        self.closing
    }

    pub fn is_running(&self) -> bool {
        self.running
    }

    pub fn runner(&self) -> Option<&Runner> {
        self.runner.as_ref()
    }

    /// Pilot commands received during the current episode, stamped with
    /// the simulation time at which they took effect.
    pub fn command_log(&self) -> Option<&CommandLog> {
        match &self.runner.as_ref()?.human {
            HumanInput::Log { log } => Some(log),
            _ => None,
        }
    }

    fn time(&self) -> f64 {
        self.runner.as_ref().map(|r| r.sim.time()).unwrap_or(0.0)
    }

    fn envelope<P: Serialize>(&mut self, kind: &str, payload: &P) -> Envelope {
        let e = Envelope::new(kind, self.next_seq, self.time(), payload);
        self.next_seq += 1;
        e
    }

    fn error(&mut self, message: impl Into<String>, offending_seq: Option<u64>) -> Envelope {
        let p = ErrorPayload {
            message: message.into(),
            offending_seq,
        };
        self.envelope("error", &p)
    }

    /// Applies one incoming line and returns the replies.
    pub fn handle_line(&mut self, line: &str) -> Vec<Envelope> {
        let env: Envelope = match serde_json::from_str(line) {
            Ok(e) => e,
            Err(e) => return vec![self.error(format!("malformed message: {e}"), salvage_seq(line))],
        };
        self.handle(env)
    }

    pub fn handle(&mut self, env: Envelope) -> Vec<Envelope> {
        let seq = Some(env.seq);
        if self.last_in_seq.is_some_and(|l| env.seq <= l) {
            return vec![self.error("seq must increase", seq)];
        }
        self.last_in_seq = seq;
        if env.kind != "hello" && !self.greeted {
            return vec![self.error("expected hello", seq)];
        }
        macro_rules! payload {
            ($t:ty) => {
                match env.payload_as::<$t>() {
                    Ok(p) => p,
                    Err(e) => return vec![self.error(format!("bad {} payload: {e}", env.kind), seq)],
                }
            };
        }
        match env.kind.as_str() {
            "hello" => {
                let h = payload!(Hello);
                if h.version != PROTOCOL_VERSION {
                    self.closing = true;
                    return vec![self.error(
                        format!("unsupported protocol version {} (server speaks {PROTOCOL_VERSION})", h.version),
                        seq,
                    )];
                }
                self.greeted = true;
                let reply = Hello {
                    version: PROTOCOL_VERSION,
                    capabilities: CAPABILITIES.iter().map(|s| s.to_string()).collect(),
                };
                vec![self.envelope("hello", &reply)]
            }
            "configure" => {
                let c = payload!(Configure);
                if self.running {
                    return vec![self.error("cannot configure a running episode", seq)];
                }
                if let Some(s) = &c.scenario {
                    if let Err(e) = s.validate() {
                        return vec![self.error(e.to_string(), seq)];
                    }
                }
                if c.alpha_max.is_some_and(|a| !(0.0..=1.0).contains(&a)) {
                    return vec![self.error("alpha_max must lie in [0, 1]", seq)];
                }
                if let Some(s) = c.scenario {
                    self.seed = s.repeat_seed(0);
                    self.scenario = s;
                }
                if let Some(s) = c.seed {
                    self.seed = s;
                }
                if let Some(a) = c.alpha_max {
                    self.alpha_max = a;
                }
                Vec::new()
            }
            "start" => match self.scenario.setup(&self.ctx.config.scene, self.seed) {
                Ok(setup) => {
                    let assist = Assist {
                        alpha_max: self.alpha_max,
                        ..self.ctx.config.assist()
                    };
                    self.runner = Some(Runner::new(
                        setup,
                        self.ctx.policy.clone(),
                        self.ctx.model.clone(),
                        HumanInput::Log { log: CommandLog::new() },
                        assist,
                    ));
                    self.running = true;
                    Vec::new()
                }
                Err(e) => vec![self.error(e.to_string(), seq)],
            },
            "stop" => {
                self.running = false;
                Vec::new()
            }
            "pilot_cmd" => {
                let p = payload!(PilotCmd);
                let cmd = p.command();
                if cmd.validate(&self.ctx.config.scene.world).is_err() {
                    return vec![self.error(OUT_OF_BOUNDS, seq)];
                }
                let Some(r) = self.runner.as_mut().filter(|_| self.running) else {
                    return vec![self.error("no episode running", seq)];
                };
                let t = r.sim.time();
                if let HumanInput::Log { log } = &mut r.human {
                    log.push(t, &cmd).expect("session time never goes backwards");
                }
                Vec::new()
            }
            "set_alpha_max" => {
                let p = payload!(SetAlphaMax);
                if !(0.0..=1.0).contains(&p.alpha_max) {
                    return vec![self.error("alpha_max must lie in [0, 1]", seq)];
                }
                self.alpha_max = p.alpha_max;
                if let Some(r) = self.runner.as_mut() {
                    r.assist.alpha_max = p.alpha_max;
                }
                Vec::new()
            }
            other => vec![self.error(format!("unknown message type {other:?}"), seq)],
        }
    }

    /// Advances the running episode by one tick. Returns its telemetry and,
    /// on the terminal tick, the metrics message; nothing while stopped or
    /// after the episode ended.
    pub fn tick(&mut self) -> Vec<Envelope> {
        if !self.running {
            return Vec::new();
        }
        let r = self.runner.as_mut().expect("running implies a runner");
        let rec = match r.tick() {
            Ok(Some(rec)) => *rec,
            Ok(None) => {
                self.running = false;
                return Vec::new();
            }
            Err(e) => {
                self.running = false;
                return vec![self.error(format!("simulation error: {e}"), None)];
            }
        };
        let scene = &r.sim.setup.scene;
        let pad_v = platform_velocity(&scene.pad.motion, scene.pad.center, rec.t);
        let tel = Telemetry::from_step(&rec, pad_v, scene.pad.radius, &r.sim.setup.wind);
        let done = r.is_done();
        let mut out = vec![self.envelope("telemetry", &tel)];
        if done {
            let r = self.runner.as_ref().expect("runner");
            let traj = r.trajectory();
            let m = MetricsMessage {
                status: traj.status,
                steps: traj.steps.len(),
                metrics: compute_metrics(&traj, &self.scenario),
            };
            out.push(self.envelope("metrics", &m));
            self.running = false;
        }
        out
    }
}
