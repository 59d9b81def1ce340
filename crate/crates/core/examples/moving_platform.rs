//! Evaluates a policy trained on a static pad against the moving-platform set.

use monoland::harness::workflow::train_one;
use monoland::harness::{emit_report, run_suite, HarnessConfig, ReportFormat};
use monoland::runner::HumanInput;
use std::sync::Arc;

fn main() -> anyhow::Result<()> {
    let cfg = HarnessConfig::default();
    let model = Arc::new(cfg.fit_estimators()?);
    let policy = Arc::new(train_one(&cfg, model.clone(), 1)?);
    let res = run_suite(
        &cfg.dynamic_scenarios(),
        policy,
        model,
        &cfg.scene,
        &cfg.suite_options(HumanInput::None),
    )?;
    print!("{}", emit_report(&res.records, ReportFormat::Md));
    Ok(())
}
