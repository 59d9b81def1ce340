#![allow(dead_code)]

use monoland::agent::PolicySnapshot;
use monoland::harness::{workflow::train_one, HarnessConfig};
use monoland::perception::EstimatorModel;
use std::sync::{Arc, Mutex, OnceLock};

pub fn config() -> HarnessConfig {
    HarnessConfig::default()
}

pub fn model() -> Arc<EstimatorModel> {
    static M: OnceLock<Arc<EstimatorModel>> = OnceLock::new();
    M.get_or_init(|| Arc::new(config().fit_estimators().expect("fit"))).clone()
}

/// Policy trained with the default configuration, cached per seed.
pub fn policy(seed: u64) -> Arc<PolicySnapshot> {
    static P: OnceLock<Mutex<Vec<(u64, Arc<PolicySnapshot>)>>> = OnceLock::new();
    let cache = P.get_or_init(|| Mutex::new(Vec::new()));
    let mut c = cache.lock().unwrap_or_else(|e| e.into_inner());
    if let Some((_, p)) = c.iter().find(|(s, _)| *s == seed) {
        return p.clone();
    }
    let p = Arc::new(train_one(&config(), model(), seed).expect("train"));
    c.push((seed, p.clone()));
    p
}
