//! Batch execution of scenario runs.
//!
//! Every run draws from its own seed-derived RNG stream, so a batch's
//! results are independent of execution order and thread count.

use crate::error::Result;
use crate::sim::{run_scenario, ScenarioConfig, ScenarioResult};

/// Runs the scenario once per seed, sequentially, in seed order.
pub fn run_scenarios_seq(cfg: &ScenarioConfig, seeds: &[u64]) -> Vec<Result<ScenarioResult>> {
    seeds.iter().map(|s| run_scenario(cfg, Some(*s))).collect()
}

/// Runs the scenario once per seed across the thread pool; results keep the
/// seed order.
#[cfg(feature = "parallel")]
pub fn run_scenarios(cfg: &ScenarioConfig, seeds: &[u64]) -> Vec<Result<ScenarioResult>> {
    use rayon::prelude::*;
    seeds.par_iter().map(|s| run_scenario(cfg, Some(*s))).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_scenarios(cfg: &ScenarioConfig, seeds: &[u64]) -> Vec<Result<ScenarioResult>> {
    run_scenarios_seq(cfg, seeds)
}

/// Runs several independent scenarios, in parallel when available. An
/// explicit seed applies to every run.
#[cfg(feature = "parallel")]
pub fn run_configs(cfgs: &[ScenarioConfig], seed: Option<u64>) -> Vec<Result<ScenarioResult>> {
    use rayon::prelude::*;
    cfgs.par_iter().map(|c| run_scenario(c, seed)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_configs(cfgs: &[ScenarioConfig], seed: Option<u64>) -> Vec<Result<ScenarioResult>> {
    cfgs.iter().map(|c| run_scenario(c, seed)).collect()
}
