//! Trains a policy and evaluates it on the static distance/angle grid.

use monoland::harness::workflow::train_one;
use monoland::harness::{emit_report, run_suite, HarnessConfig, ReportFormat};
use monoland::runner::HumanInput;
use std::sync::Arc;

fn main() -> anyhow::Result<()> {
    let cfg = HarnessConfig::default();
    let model = Arc::new(cfg.fit_estimators()?);
    let policy = Arc::new(train_one(&cfg, model.clone(), 1)?);
    let res = run_suite(
        &cfg.static_scenarios(),
        policy,
        model,
        &cfg.scene,
        &cfg.suite_options(HumanInput::None),
    )?;
    print!("{}", emit_report(&res.records, ReportFormat::Md));
    let landed = res.runs.iter().filter(|r| r.metrics.success).count();
    println!("\n{landed}/{} episodes landed", res.runs.len());
    Ok(())
}
