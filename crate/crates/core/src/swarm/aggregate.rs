use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::robot::{GravityConstant, RobotParams};
use crate::sampling::SampleSet;

use super::cost::CostId;
use super::pso::{pso_run, PsoConfig, SearchBox, SwarmRunResult};

/// Runs whose best cost exceeds this multiple of the median are dropped.
pub const DISCARD_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    /// Componentwise mean of the surviving runs.
    pub params: RobotParams,
    pub runs: Vec<SwarmRunResult>,
    pub discarded: Vec<usize>,
    pub threshold: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Mean of the runs whose best cost is at most 1.5x the median best cost.
/// At least half the runs always survive.
pub fn combine_runs(runs: Vec<SwarmRunResult>) -> AggregateResult {
    let costs: Vec<f64> = runs.iter().map(|r| r.best_cost).collect();
    let threshold = DISCARD_FACTOR * median(&costs);
    let discarded: Vec<usize> = (0..runs.len()).filter(|&i| costs[i] > threshold).collect();
    let kept: Vec<&SwarmRunResult> = runs.iter().filter(|r| r.best_cost <= threshold).collect();
    let mut mean = [0.0; 4];
    for r in &kept {
        for (m, x) in mean.iter_mut().zip(r.best_position.to_array()) {
            *m += x;
        }
    }
    let mean = mean.map(|m| m / kept.len() as f64);
    AggregateResult { params: RobotParams::from_array(mean), runs, discarded, threshold }
}

/// One run per seed (in parallel), then [`combine_runs`].
pub fn pso_aggregate(
    id: CostId,
    set: &SampleSet,
    g: GravityConstant,
    cfg: &PsoConfig,
    search: &SearchBox,
    seeds: &[u64],
) -> Result<AggregateResult> {
    if seeds.len() < 2 {
        return Err(Error::Config("aggregation needs at least 2 seeds".into()));
    }
    let runs = seeds
        .par_iter()
        .map(|&seed| pso_run(id, set, g, cfg, search, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine_runs(runs))
}
