//! Trains one landing policy and prints its smoothed learning curve.

use monoland::agent::qlearn::smooth;
use monoland::agent::train_landing;
use monoland::harness::HarnessConfig;
use std::sync::Arc;

fn main() -> anyhow::Result<()> {
    let cfg = HarnessConfig::default();
    let model = Arc::new(cfg.fit_estimators()?);
    let (policy, curve) = train_landing(&cfg.task(), model, &cfg.rl.hyperparams, cfg.rl.episodes, 1)?;
    let s = smooth(&curve, 500);
    for i in (0..s.len()).step_by(s.len() / 10) {
        println!("episode {:6}  epsilon {:.3}  smoothed return {:8.2}", i, curve[i].epsilon, s[i]);
    }
    let visited = (0..policy.num_states).filter(|&st| policy.row(st).iter().any(|q| *q != 0.0)).count();
    println!("{visited}/{} states visited; table {} bytes", policy.num_states, policy.to_bytes().len());
    Ok(())
}
