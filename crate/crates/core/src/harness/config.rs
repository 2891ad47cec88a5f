use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::robot::{GravityConstant, Interval, RobotParams};
use crate::sampling::NoiseScenario;
use crate::swarm::{PsoConfig, SearchBox};

use super::method::Method;

/// Everything one benchmark depends on, seeds included.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub true_params: RobotParams,
    pub g: GravityConstant,
    /// `None` uses the scenario default (20 for all-component noise, else 10).
    pub sample_count: Option<usize>,
    pub scenario: NoiseScenario,
    pub data_seed: u64,
    pub pso: PsoConfig,
    pub search_box: SearchBox,
    pub methods: Vec<Method>,
    pub pso_seeds: Vec<u64>,
    /// Offset the PSO seed list per cost id instead of sharing it.
    pub distinct_pso_seeds: bool,
    /// Study statistics skip flagged estimates when set.
    pub exclude_flagged: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            true_params: RobotParams::REFERENCE,
            g: GravityConstant::STANDARD,
            sample_count: None,
            scenario: NoiseScenario::s1(),
            data_seed: 1,
            pso: PsoConfig::default(),
            search_box: SearchBox::default(),
            methods: Method::all(),
            pso_seeds: (1..=10).collect(),
            distinct_pso_seeds: false,
            exclude_flagged: false,
        }
    }
}

impl BenchmarkConfig {
    pub fn samples(&self) -> usize {
        self.sample_count.unwrap_or_else(|| self.scenario.default_sample_count())
    }

    /// PSO seeds used for cost function `id` (1..=16).
    pub fn pso_seeds_for(&self, id: u8) -> Vec<u64> {
        let offset = if self.distinct_pso_seeds { 1000 * u64::from(id) } else { 0 };
        self.pso_seeds.iter().map(|s| s + offset).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.true_params.validate()?;
        let n = self.samples();
        if n < 2 {
            return Err(Error::Config("sample_count must be at least 2".into()));
        }
        self.scenario.validate(n)?;
        self.pso.validate()?;
        self.search_box.bounds()?;
        if self.methods.is_empty() {
            return Err(Error::Config("method list is empty".into()));
        }
        if self.methods.iter().any(Method::is_pso) && self.pso_seeds.len() < 2 {
            return Err(Error::Config("PSO methods need at least 2 seeds".into()));
        }
        if self.pso_seeds.len() != self.pso.runs_per_estimate {
            return Err(Error::Config(format!(
                "{} PSO seeds for {} runs per estimate",
                self.pso_seeds.len(),
                self.pso.runs_per_estimate
            )));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let cfg = file.resolve()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Fully resolved config, every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(&ConfigFile::from(self)).expect("config serializes")
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    scenario: Option<String>,
    data_seed: Option<u64>,
    g: Option<f64>,
    sample_count: Option<usize>,
    methods: Option<Vec<String>>,
    pso_seeds: Option<Vec<u64>>,
    distinct_pso_seeds: Option<bool>,
    exclude_flagged: Option<bool>,
    true_params: Option<ParamsFile>,
    pso: Option<PsoFile>,
    search_box: Option<BoxFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    m2: f64,
    m3: f64,
    s3z: f64,
    inertia_i: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PsoFile {
    population: Option<usize>,
    iterations: Option<usize>,
    c1: Option<f64>,
    c2: Option<f64>,
    inertia_start: Option<f64>,
    inertia_end: Option<f64>,
    inertia_ramp_iters: Option<usize>,
    per_dimension_random: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxFile {
    m2: Option<[f64; 2]>,
    m3: Option<[f64; 2]>,
    s3z: Option<[f64; 2]>,
    inertia_i: Option<[f64; 2]>,
}

impl ConfigFile {
    fn resolve(self) -> Result<BenchmarkConfig> {
        let d = BenchmarkConfig::default();
        let scenario = match self.scenario {
            Some(s) => s.parse()?,
            None => d.scenario,
        };
        let g = match self.g {
            Some(g) => GravityConstant::new(g)?,
            None => d.g,
        };
        let true_params = match self.true_params {
            Some(p) => RobotParams::new(p.m2, p.m3, p.s3z, p.inertia_i)?,
            None => d.true_params,
        };
        let methods = match self.methods {
            Some(names) => names.iter().map(|n| n.parse()).collect::<Result<Vec<Method>>>()?,
            None => d.methods,
        };
        let pf = self.pso.unwrap_or_default();
        let dp = d.pso;
        let pso = PsoConfig {
            population: pf.population.unwrap_or(dp.population),
            iterations: pf.iterations.unwrap_or(dp.iterations),
            c1: pf.c1.unwrap_or(dp.c1),
            c2: pf.c2.unwrap_or(dp.c2),
            inertia_start: pf.inertia_start.unwrap_or(dp.inertia_start),
            inertia_end: pf.inertia_end.unwrap_or(dp.inertia_end),
            inertia_ramp_iters: pf.inertia_ramp_iters.unwrap_or(dp.inertia_ramp_iters),
            per_dimension_random: pf.per_dimension_random.unwrap_or(dp.per_dimension_random),
            runs_per_estimate: self.pso_seeds.as_ref().map_or(dp.runs_per_estimate, Vec::len),
        };
        let bf = self.search_box.unwrap_or_default();
        let db = d.search_box;
        let iv = |v: Option<[f64; 2]>, def: Interval| v.map_or(def, |[min, max]| Interval { min, max });
        let search_box = SearchBox {
            m2: iv(bf.m2, db.m2),
            m3: iv(bf.m3, db.m3),
            s3z: iv(bf.s3z, db.s3z),
            inertia_i: iv(bf.inertia_i, db.inertia_i),
        };
        Ok(BenchmarkConfig {
            true_params,
            g,
            sample_count: self.sample_count,
            scenario,
            data_seed: self.data_seed.unwrap_or(d.data_seed),
            pso,
            search_box,
            methods,
            pso_seeds: self.pso_seeds.unwrap_or(d.pso_seeds),
            distinct_pso_seeds: self.distinct_pso_seeds.unwrap_or(d.distinct_pso_seeds),
            exclude_flagged: self.exclude_flagged.unwrap_or(d.exclude_flagged),
        })
    }
}

impl From<&BenchmarkConfig> for ConfigFile {
    fn from(c: &BenchmarkConfig) -> Self {
        let p = &c.true_params;
        let b = &c.search_box;
        let pair = |i: Interval| Some([i.min, i.max]);
        Self {
            scenario: Some(c.scenario.to_string()),
            data_seed: Some(c.data_seed),
            g: Some(c.g.value()),
            sample_count: Some(c.samples()),
            methods: Some(c.methods.iter().map(Method::cli_name).collect()),
            pso_seeds: Some(c.pso_seeds.clone()),
            distinct_pso_seeds: Some(c.distinct_pso_seeds),
            exclude_flagged: Some(c.exclude_flagged),
            true_params: Some(ParamsFile { m2: p.m2, m3: p.m3, s3z: p.s3z, inertia_i: p.inertia_i }),
            pso: Some(PsoFile {
                population: Some(c.pso.population),
                iterations: Some(c.pso.iterations),
                c1: Some(c.pso.c1),
                c2: Some(c.pso.c2),
                inertia_start: Some(c.pso.inertia_start),
                inertia_end: Some(c.pso.inertia_end),
                inertia_ramp_iters: Some(c.pso.inertia_ramp_iters),
                per_dimension_random: Some(c.pso.per_dimension_random),
            }),
            search_box: Some(BoxFile {
                m2: pair(b.m2),
                m3: pair(b.m3),
                s3z: pair(b.s3z),
                inertia_i: pair(b.inertia_i),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = BenchmarkConfig::from_toml("").unwrap();
        assert_eq!(cfg, BenchmarkConfig::default());
        assert_eq!(cfg.methods.len(), 22);
        assert_eq!(cfg.samples(), 10);
    }

    #[test]
    fn all_noise_defaults_to_twenty_samples() {
        let cfg = BenchmarkConfig::from_toml("scenario = \"s3\"").unwrap();
        assert_eq!(cfg.samples(), 20);
        let cfg = BenchmarkConfig::from_toml("scenario = \"s3\"\nsample_count = 12").unwrap();
        assert_eq!(cfg.samples(), 12);
    }

    #[test]
    fn resolved_config_round_trips() {
        let text = "scenario = \"s4\"\ndata_seed = 7\nmethods = [\"ls\", \"pso-f13\"]\n\
                    [pso]\niterations = 150\n[search_box]\ns3z = [-2.0, 2.0]\n";
        let cfg = BenchmarkConfig::from_toml(text).unwrap();
        assert_eq!(cfg.pso.iterations, 150);
        assert_eq!(cfg.search_box.s3z, Interval { min: -2.0, max: 2.0 });
        let again = BenchmarkConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again.sample_count, Some(10));
        assert_eq!(BenchmarkConfig { sample_count: None, ..again }, cfg);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(BenchmarkConfig::from_toml("colour = 3").is_err());
        assert!(BenchmarkConfig::from_toml("scenario = \"s9\"").is_err());
        assert!(BenchmarkConfig::from_toml("methods = [\"ols\"]").is_err());
        assert!(BenchmarkConfig::from_toml("methods = []").is_err());
        assert!(BenchmarkConfig::from_toml("pso_seeds = [1]").is_err());
        assert!(BenchmarkConfig::from_toml("g = -1.0").is_err());
    }

    #[test]
    fn distinct_seed_lists() {
        let mut cfg = BenchmarkConfig::default();
        assert_eq!(cfg.pso_seeds_for(13), cfg.pso_seeds);
        cfg.distinct_pso_seeds = true;
        assert_eq!(cfg.pso_seeds_for(2)[0], 2001);
    }
}
