use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{self, AnalyticOutcome};
use crate::robot::{BaseParams, RobotParams};
use crate::sampling::{collect_samples, corrupt, SampleSet};
use crate::swarm::{pso_aggregate, CostId};

use super::config::BenchmarkConfig;
use super::method::Method;

pub const REAL_VALUES: &str = "real values";

/// One table row. `neg_s3z` is reported as −s3z, the way the tables print it.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRecord {
    pub method: String,
    pub m2: f64,
    pub m3: f64,
    pub neg_s3z: f64,
    pub inertia_i: f64,
    /// Wall-clock seconds; `None` for the reference row.
    pub seconds: Option<f64>,
    pub flags: Vec<String>,
}

impl EstimateRecord {
    pub fn from_params(method: impl Into<String>, p: &RobotParams, seconds: Option<f64>) -> Self {
        Self {
            method: method.into(),
            m2: p.m2,
            m3: p.m3,
            neg_s3z: -p.s3z,
            inertia_i: p.inertia_i,
            seconds,
            flags: Vec::new(),
        }
    }

    pub fn reference(p: &RobotParams) -> Self {
        Self::from_params(REAL_VALUES, p, None)
    }

    pub fn params(&self) -> RobotParams {
        RobotParams::from_array([self.m2, self.m3, -self.neg_s3z, self.inertia_i])
    }

    pub fn values(&self) -> [f64; 4] {
        [self.m2, self.m3, self.neg_s3z, self.inertia_i]
    }

    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }
}

fn error_flag(e: &Error) -> String {
    match e {
        Error::RankDeficient { .. } => "rank-deficient".into(),
        Error::Singular { .. } => "singular".into(),
        Error::ExtractionDegenerate { .. } => "extraction-degenerate".into(),
        Error::NoConvergence { .. } => "no-convergence".into(),
        Error::ZeroTorque => "zero-torque".into(),
        _ => "failed".into(),
    }
}

/// Division carried out even when the extraction guard refused it.
fn raw_extraction(a: &BaseParams) -> RobotParams {
    let [a1, a2, a3, a4] = a.0;
    let s3z = a4 / a3;
    RobotParams::from_array([a2, a3, s3z, a1 - a4 * s3z])
}

fn analytic_record(out: AnalyticOutcome) -> EstimateRecord {
    let params = match (&out.params, &out.alpha) {
        (Some(p), _) => *p,
        (None, Some(a)) => raw_extraction(a),
        (None, None) => RobotParams::from_array([f64::NAN; 4]),
    };
    let mut rec = EstimateRecord::from_params(out.method.to_string(), &params, Some(out.seconds));
    if out.diagnostics.as_ref().is_some_and(|d| d.condition_flag) {
        rec.flags.push("ill-conditioned".into());
    }
    if let Some(e) = &out.error {
        rec.flags.push(error_flag(e));
    }
    if out.params.is_some_and(|p| !p.is_physical()) {
        rec.flags.push("non-physical".into());
    }
    rec
}

fn pso_record(id: CostId, set: &SampleSet, cfg: &BenchmarkConfig) -> EstimateRecord {
    let name = Method::Pso(id).to_string();
    let seeds = cfg.pso_seeds_for(id.index());
    let start = Instant::now();
    let agg = pso_aggregate(id, set, set.provenance.g, &cfg.pso, &cfg.search_box, &seeds);
    let seconds = Some(start.elapsed().as_secs_f64());
    match agg {
        Ok(agg) => {
            let mut rec = EstimateRecord::from_params(name, &agg.params, seconds);
            if !agg.discarded.is_empty() {
                let s: Vec<String> = agg.discarded.iter().map(|&i| agg.runs[i].seed.to_string()).collect();
                rec.flags.push(format!("discarded-seeds:{}", s.join(",")));
            }
            rec
        }
        Err(e) => {
            let mut rec = EstimateRecord::from_params(name, &RobotParams::from_array([f64::NAN; 4]), seconds);
            rec.flags.push(error_flag(&e));
            rec
        }
    }
}

/// Estimates one method on a given set; never fails, failures are flags.
pub fn estimate_method(method: Method, set: &SampleSet, cfg: &BenchmarkConfig) -> EstimateRecord {
    match method {
        Method::Analytic(m) => analytic_record(estimators::estimate(m, set, set.provenance.g)),
        Method::Pso(id) => pso_record(id, set, cfg),
    }
}

/// Runs the configured methods on `set`, in configured order.
pub fn run_methods(cfg: &BenchmarkConfig, set: &SampleSet) -> Vec<EstimateRecord> {
    cfg.methods.par_iter().map(|&m| estimate_method(m, set, cfg)).collect()
}

/// The clean set from the configured true parameters, then its corruption.
pub fn benchmark_data(cfg: &BenchmarkConfig) -> Result<SampleSet> {
    let clean = collect_samples(&cfg.true_params, cfg.g, cfg.samples())?;
    corrupt(&clean, &cfg.scenario, cfg.data_seed)
}

/// Reference row followed by one record per configured method.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<Vec<EstimateRecord>> {
    cfg.validate()?;
    let set = benchmark_data(cfg)?;
    let mut records = vec![EstimateRecord::reference(&cfg.true_params)];
    records.extend(run_methods(cfg, &set));
    Ok(records)
}
