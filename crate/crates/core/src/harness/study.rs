use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sampling::{full_precision, NoiseScenario};
use crate::swarm::{median, CostId};

use super::bench::{run_benchmark, EstimateRecord};
use super::config::BenchmarkConfig;
use super::method::Method;

pub const COMPOSITE_F13_F14: &str = "PSO-f13f14-avg";

pub const STUDY_HEADER: [&str; 15] = [
    "scenario",
    "method",
    "seeds",
    "used",
    "mean_m2",
    "mean_m3",
    "mean_s3z",
    "mean_inertia_i",
    "median_m2",
    "median_m3",
    "median_s3z",
    "median_inertia_i",
    "pooled_mean",
    "pooled_median",
    "flagged",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagPolicy {
    Include,
    Exclude,
}

/// Error statistics for one method under one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub scenario: String,
    pub method: String,
    /// Estimates that entered the statistics.
    pub used: usize,
    /// Flagged estimates seen, whether used or not.
    pub flagged: usize,
    /// Mean absolute relative error per parameter (m2, m3, s3z, I).
    pub mean: [f64; 4],
    pub median: [f64; 4],
    /// Mean over seeds of the per-seed mean over parameters.
    pub pooled_mean: f64,
    pub pooled_median: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub seed_count: usize,
    pub flag_policy: FlagPolicy,
    pub rows: Vec<StudyRow>,
}

impl StudyResult {
    pub fn row(&self, scenario: &str, method: &str) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.scenario == scenario && r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(STUDY_HEADER).expect("in-memory write");
        for r in &self.rows {
            let mut row = vec![r.scenario.clone(), r.method.clone(), self.seed_count.to_string(), r.used.to_string()];
            row.extend(r.mean.iter().chain(&r.median).map(|&v| full_precision(v)));
            row.push(full_precision(r.pooled_mean));
            row.push(full_precision(r.pooled_median));
            let policy = match self.flag_policy {
                FlagPolicy::Include => "included",
                FlagPolicy::Exclude => "excluded",
            };
            row.push(format!("{} {policy}", r.flagged));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 table")
    }
}

/// |(est − true)/true| per parameter, s3z compared with its sign.
pub fn relative_errors(rec: &EstimateRecord, truth: &EstimateRecord) -> [f64; 4] {
    let e = rec.values();
    let t = truth.values();
    std::array::from_fn(|k| ((e[k] - t[k]) / t[k]).abs())
}

/// Componentwise mean of the PSO-f13 and PSO-f14 rows, if both are present.
pub fn composite_f13_f14(records: &[EstimateRecord]) -> Option<EstimateRecord> {
    let find = |id| {
        let name = Method::Pso(CostId::new(id).expect("valid id")).to_string();
        records.iter().find(|r| r.method == name)
    };
    let (a, b) = (find(13)?, find(14)?);
    let v: [f64; 4] = std::array::from_fn(|k| 0.5 * (a.values()[k] + b.values()[k]));
    let mut flags = a.flags.clone();
    flags.extend(b.flags.iter().filter(|f| !a.flags.contains(f)).cloned());
    let seconds = a.seconds.zip(b.seconds).map(|(x, y)| x + y);
    Some(EstimateRecord {
        method: COMPOSITE_F13_F14.into(),
        m2: v[0],
        m3: v[1],
        neg_s3z: v[2],
        inertia_i: v[3],
        seconds,
        flags,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Runs one benchmark per (scenario, data seed) and summarizes each method.
/// The sample count follows each scenario's default unless the base config
/// fixes it. Non-finite estimates never enter the statistics.
pub fn run_study(base: &BenchmarkConfig, scenarios: &[NoiseScenario], seeds: &[u64]) -> Result<StudyResult> {
    if seeds.len() < 2 {
        return Err(Error::Config("a study needs at least 2 data seeds".into()));
    }
    if scenarios.is_empty() {
        return Err(Error::Config("a study needs at least one scenario".into()));
    }
    let policy = if base.exclude_flagged { FlagPolicy::Exclude } else { FlagPolicy::Include };
    let cells: Vec<(usize, u64)> = (0..scenarios.len()).flat_map(|s| seeds.iter().map(move |&d| (s, d))).collect();
    let tables = cells
        .par_iter()
        .map(|&(s, data_seed)| {
            let cfg = BenchmarkConfig { scenario: scenarios[s].clone(), data_seed, ..base.clone() };
            let mut recs = run_benchmark(&cfg)?;
            if let Some(c) = composite_f13_f14(&recs) {
                recs.push(c);
            }
            Ok(recs)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (s, scenario) in scenarios.iter().enumerate() {
        let group: Vec<&Vec<EstimateRecord>> =
            cells.iter().zip(&tables).filter(|((c, _), _)| *c == s).map(|(_, t)| t).collect();
        let names: Vec<String> = group[0][1..].iter().map(|r| r.method.clone()).collect();
        for name in names {
            let mut errs: Vec<[f64; 4]> = Vec::new();
            let mut flagged = 0;
            for table in &group {
                let truth = &table[0];
                let rec = table.iter().find(|r| r.method == name).expect("same methods per cell");
                flagged += usize::from(rec.is_flagged());
                if rec.is_flagged() && policy == FlagPolicy::Exclude {
                    continue;
                }
                let e = relative_errors(rec, truth);
                if e.iter().all(|x| x.is_finite()) {
                    errs.push(e);
                }
            }
            let per_param = |k: usize| errs.iter().map(|e| e[k]).collect::<Vec<f64>>();
            let pooled: Vec<f64> = errs.iter().map(|e| mean(e)).collect();
            let (m, md, pm, pmd) = if errs.is_empty() {
                ([f64::NAN; 4], [f64::NAN; 4], f64::NAN, f64::NAN)
            } else {
                (
                    std::array::from_fn(|k| mean(&per_param(k))),
                    std::array::from_fn(|k| median(&per_param(k))),
                    mean(&pooled),
                    median(&pooled),
                )
            };
            rows.push(StudyRow {
                scenario: scenario.to_string(),
                method: name,
                used: errs.len(),
                flagged,
                mean: m,
                median: md,
                pooled_mean: pm,
                pooled_median: pmd,
            });
        }
    }
    Ok(StudyResult { seed_count: seeds.len(), flag_policy: policy, rows })
}
