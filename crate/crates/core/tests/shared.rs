mod common;

use monoland::runner::{run_episode, Assist, HumanInput, Trajectory};
use monoland::shared::*;
use monoland::world::{ControlCommand, WorldConfig};
use nalgebra::Vector3;
use proptest::prelude::*;

fn cmd() -> impl Strategy<Value = ControlCommand> {
    (-1.5..1.5f64, -1.5..1.5f64, -1.5..1.5f64, -0.5..0.5f64).prop_map(|(x, y, z, r)| ControlCommand {
        v_cmd: Vector3::new(x, y, z),
        yaw_rate: r,
        land: false,
    })
}

fn between(x: f64, a: f64, b: f64) -> bool {
    x >= a.min(b) - 1e-12 && x <= a.max(b) + 1e-12
}

#[test]
fn blend_examples() {
    let cfg = WorldConfig::default();
    let ai = ControlCommand::new(1.0, -0.5, 0.25);
    let b = blend(&ControlCommand::hover(), &ai, 0.0, 0.6, &cfg);
    assert!((b.command.v_cmd - ai.v_cmd * 0.6).norm() < 1e-12);
    assert_eq!(b.alpha, 0.6);
    let h = ControlCommand::new(-0.3, 0.2, 0.0);
    let b = blend(&h, &ai, 1.0, 0.6, &cfg);
    assert_eq!(b.command, h);
    assert_eq!(b.alpha, 0.0);
    let b = blend(&ai, &ai, 0.3, 0.6, &cfg);
    assert!((b.command.v_cmd - ai.v_cmd).norm() < 1e-12);
}

#[test]
fn land_flag_rule() {
    let cfg = WorldConfig::default();
    let mut ai = ControlCommand::new(0.0, 0.0, -0.4);
    ai.land = true;
    let h = ControlCommand::new(0.0, 0.0, -0.4);
    assert!(blend(&h, &ai, 0.1, 0.6, &cfg).command.land);
    assert!(!blend(&h, &ai, 0.5, 0.6, &cfg).command.land);
    let mut hl = h;
    hl.land = true;
    assert!(blend(&hl, &ControlCommand::hover(), 1.0, 0.6, &cfg).command.land);
}

#[test]
fn conflict_examples() {
    let u = ControlCommand::new(0.7, -0.2, 0.1);
    let neg = ControlCommand {
        v_cmd: -u.v_cmd,
        ..u
    };
    assert_eq!(conflict(&u, &u, None), 0.0);
    assert!(conflict(&u, &neg, None) >= 0.5);
    assert_eq!(conflict(&u, &neg, Some(&u)), 1.0);
    assert_eq!(conflict(&ControlCommand::hover(), &u, None), 0.0);
}

fn sine(n: usize, period: f64, amp: f64, phase: f64) -> Vec<ControlCommand> {
    (0..n)
        .map(|t| {
            let w = 2.0 * std::f64::consts::PI * t as f64 / period + phase;
            ControlCommand::new(amp * w.sin(), amp * 0.5 * w.cos(), 0.0)
        })
        .collect()
}

#[test]
fn sine_intent_prediction() {
    let cfg = WorldConfig::default();
    let amp = 1.0;
    let hist = sine(400, 37.0, amp, 0.0);
    let m = fit_intent(&[hist], 10).unwrap();
    assert!(m.trained);
    let probe = sine(200, 37.0, amp, 1.1);
    let mut worst: f64 = 0.0;
    for t in 10..probe.len() {
        let p = m.predict(&probe[..t], &cfg);
        worst = worst.max((p.v_cmd - probe[t].v_cmd).amax());
    }
    assert!(worst <= 0.05 * amp, "worst one-step error {worst}");
}

#[test]
fn constant_intent_prediction() {
    let cfg = WorldConfig::default();
    let c = ControlCommand::new(0.8, -0.3, -0.1);
    let m = fit_intent(&[vec![c; 300]], 10).unwrap();
    let p = m.predict(&vec![c; 20], &cfg);
    assert!((p.v_cmd - c.v_cmd).norm() < 1e-6);
    assert!(m.error_ema < 1e-6);
}

#[test]
fn short_history_is_insufficient() {
    let c = ControlCommand::new(0.8, -0.3, -0.1);
    assert!(matches!(fit_intent(&[vec![c; 10]], 10), Err(SharedError::InsufficientData(_))));
}

fn same_flight(a: &Trajectory, b: &Trajectory) -> bool {
    a.status == b.status
        && a.steps.len() == b.steps.len()
        && a.steps.iter().zip(&b.steps).all(|(x, y)| {
            x.state.position == y.state.position
                && x.state.velocity == y.state.velocity
                && x.state.yaw == y.state.yaw
                && x.estimate == y.estimate
        })
}

#[test]
fn idle_pilot_passthrough_is_step_exact() {
    let cfg = common::config();
    let policy = common::policy(1);
    for sc in cfg.static_scenarios().iter().take(5) {
        let setup = sc.setup(&cfg.scene, sc.repeat_seed(0)).unwrap();
        let alone = run_episode(setup.clone(), policy.clone(), common::model(), HumanInput::None, Assist::default())
            .unwrap();
        let idle = HumanInput::Pilot {
            model: PilotModel::new(PilotKind::Idle),
        };
        let blended = run_episode(setup, policy.clone(), common::model(), idle, Assist::default()).unwrap();
        assert!(same_flight(&alone, &blended), "case {}", sc.id);
        assert!(blended.steps.iter().all(|s| s.blended == s.ai));
    }
}

#[test]
fn full_conflict_hands_control_to_the_pilot() {
    let cfg = common::config();
    let policy = common::policy(1);
    let sc = &cfg.static_scenarios()[2];
    let setup = sc.setup(&cfg.scene, 3).unwrap();
    let pilot = HumanInput::Pilot {
        model: PilotModel::new(PilotKind::Noisy { sigma: 0.2 }),
    };
    let assist = Assist {
        conflict_override: Some(1.0),
        ..Assist::default()
    };
    let t = run_episode(setup, policy, common::model(), pilot, assist).unwrap();
    assert!(!t.steps.is_empty());
    for s in &t.steps {
        assert_eq!(Some(s.blended), s.human);
        assert_eq!(s.alpha, 0.0);
    }
}

proptest! {
    #[test]
    fn blend_is_convex(h in cmd(), a in cmd(), c in 0.0..=1.0f64, am in 0.0..=1.0f64) {
        let b = blend(&h, &a, c, am, &WorldConfig::default());
        for k in 0..3 {
            prop_assert!(between(b.command.v_cmd[k], h.v_cmd[k], a.v_cmd[k]));
        }
        prop_assert!(between(b.command.yaw_rate, h.yaw_rate, a.yaw_rate));
        prop_assert!((b.alpha - am * (1.0 - c)).abs() < 1e-12);
    }

    #[test]
    fn full_conflict_returns_human(h in cmd(), a in cmd(), am in 0.0..=1.0f64) {
        let b = blend(&h, &a, 1.0, am, &WorldConfig::default());
        prop_assert_eq!(b.command, h);
    }

    #[test]
    fn conflict_in_unit_interval(h in cmd(), a in cmd(), p in cmd()) {
        let c = conflict(&h, &a, Some(&p));
        prop_assert!((0.0..=1.0).contains(&c));
        let base = conflict(&h, &a, None);
        prop_assert!(c >= base);
    }

    #[test]
    fn command_log_holds_last_command(ts in prop::collection::vec(0.0..0.3f64, 1..20), q in 0.0..0.3f64) {
        let mut log = CommandLog::new();
        let mut t = 0.0;
        let mut stamps = Vec::new();
        for (i, dt) in ts.iter().enumerate() {
            t += dt;
            log.push(t, &ControlCommand::new(i as f64 * 0.01, 0.0, 0.0)).unwrap();
            stamps.push(t);
        }
        let at = t + q;
        let held = log.held_at(at);
        let last = stamps.len() - 1 - stamps.iter().rev().position(|&s| s <= at).unwrap();
        if at - stamps[last] <= HOLD_STALENESS {
            prop_assert!((held.v_cmd.x - last as f64 * 0.01).abs() < 1e-12);
        }
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        prop_assert_eq!(CommandLog::read_csv(&buf[..]).unwrap(), log);
    }
}
