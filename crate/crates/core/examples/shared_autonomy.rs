//! A noisy scripted pilot flies every static case alone and again with the
//! co-pilot blended in.

use monoland::harness::workflow::train_one;
use monoland::harness::{compute_metrics, HarnessConfig};
use monoland::runner::{run_episode, Assist, HumanInput};
use monoland::shared::{PilotKind, PilotModel};
use std::sync::Arc;

fn main() -> anyhow::Result<()> {
    let cfg = HarnessConfig::default();
    let model = Arc::new(cfg.fit_estimators()?);
    let policy = Arc::new(train_one(&cfg, model.clone(), 1)?);
    let pilot = HumanInput::Pilot {
        model: PilotModel::new(PilotKind::Noisy { sigma: 0.3 }),
    };
    println!("case  alone cm  assisted cm  mean alpha");
    for sc in cfg.static_scenarios() {
        let setup = sc.setup(&cfg.scene, sc.repeat_seed(0))?;
        let fly = |assist| run_episode(setup.clone(), policy.clone(), model.clone(), pilot.clone(), assist);
        let alone = fly(Assist {
            alpha_max: 0.0,
            ..cfg.assist()
        })?;
        let assisted = fly(cfg.assist())?;
        let alpha = assisted.steps.iter().map(|s| s.alpha).sum::<f64>() / assisted.steps.len() as f64;
        println!(
            "{:4}  {:8.2}  {:11.2}  {:10.2}",
            sc.id,
            compute_metrics(&alone, &sc).lateral_displacement_cm,
            compute_metrics(&assisted, &sc).lateral_displacement_cm,
            alpha
        );
    }
    Ok(())
}
