//! Sampling the excitation trajectory and corrupting the samples.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::numerics::{SeededRng, UnitSource};
use crate::robot::{inverse_dynamics, trajectory, GravityConstant, JointState, RobotParams, TRAJECTORY_DURATION};

/// Scalar components per sample: 9 state values then 3 torques.
pub const COMPONENTS_PER_SAMPLE: usize = 12;

pub const CSV_HEADER: [&str; 13] = [
    "t",
    "theta1",
    "d2",
    "d3",
    "theta1_dot",
    "d2_dot",
    "d3_dot",
    "theta1_ddot",
    "d2_ddot",
    "d3_ddot",
    "tau1",
    "tau2",
    "tau3",
];

/// Formats with 17 significant digits, which round-trips every `f64`.
pub fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub state: JointState,
    pub torque: [f64; 3],
}

impl Sample {
    pub fn components(&self) -> [f64; COMPONENTS_PER_SAMPLE] {
        let mut out = [0.0; COMPONENTS_PER_SAMPLE];
        out[..9].copy_from_slice(&self.state.to_array());
        out[9..].copy_from_slice(&self.torque);
        out
    }

    fn with_components(&self, c: [f64; COMPONENTS_PER_SAMPLE]) -> Self {
        let mut state = [0.0; 9];
        state.copy_from_slice(&c[..9]);
        Self { time: self.time, state: JointState::from_array(state), torque: [c[9], c[10], c[11]] }
    }
}

/// How a data set was corrupted.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseScenario {
    /// Relative noise on the 9 state components only.
    StateNoise { bound: f64 },
    /// Relative noise on the 3 torque components only.
    TorqueNoise { bound: f64 },
    /// Relative noise on all 12 components.
    AllNoise { bound: f64 },
    /// `count` components with large errors, small errors elsewhere.
    Outliers { count: usize, outlier_bound: f64, base_bound: f64 },
    /// One bound per component, in CSV column order (without `t`).
    Custom { bounds: [f64; COMPONENTS_PER_SAMPLE] },
}

impl NoiseScenario {
    pub fn s1() -> Self {
        Self::StateNoise { bound: 0.20 }
    }

    pub fn s2() -> Self {
        Self::TorqueNoise { bound: 0.20 }
    }

    pub fn s3() -> Self {
        Self::AllNoise { bound: 0.20 }
    }

    pub fn s4() -> Self {
        Self::Outliers { count: 10, outlier_bound: 0.70, base_bound: 0.05 }
    }

    pub fn zero() -> Self {
        Self::Custom { bounds: [0.0; COMPONENTS_PER_SAMPLE] }
    }

    /// Sample count the benchmark uses for this scenario when none is given.
    pub fn default_sample_count(&self) -> usize {
        match self {
            Self::AllNoise { .. } => 20,
            _ => 10,
        }
    }

    pub fn component_bounds(&self) -> [f64; COMPONENTS_PER_SAMPLE] {
        let mut b = [0.0; COMPONENTS_PER_SAMPLE];
        match *self {
            Self::StateNoise { bound } => b[..9].fill(bound),
            Self::TorqueNoise { bound } => b[9..].fill(bound),
            Self::AllNoise { bound } => b.fill(bound),
            Self::Outliers { base_bound, .. } => b.fill(base_bound),
            Self::Custom { bounds } => b = bounds,
        }
        b
    }

    pub fn validate(&self, sample_count: usize) -> Result<()> {
        let in_range = |b: f64| (0.0..1.0).contains(&b);
        let ok = match *self {
            Self::Outliers { count, outlier_bound, base_bound } => {
                if count > sample_count * COMPONENTS_PER_SAMPLE {
                    return Err(Error::InvalidParameter(format!(
                        "{count} outliers exceed {} components",
                        sample_count * COMPONENTS_PER_SAMPLE
                    )));
                }
                in_range(outlier_bound) && in_range(base_bound) && base_bound < outlier_bound
            }
            _ => self.component_bounds().iter().all(|&b| in_range(b)),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("noise bounds of {self} outside [0, 1)")))
        }
    }
}

impl fmt::Display for NoiseScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            s if *s == Self::s1() => write!(f, "s1"),
            s if *s == Self::s2() => write!(f, "s2"),
            s if *s == Self::s3() => write!(f, "s3"),
            s if *s == Self::s4() => write!(f, "s4"),
            Self::StateNoise { bound } => write!(f, "state:{bound}"),
            Self::TorqueNoise { bound } => write!(f, "torque:{bound}"),
            Self::AllNoise { bound } => write!(f, "all:{bound}"),
            Self::Outliers { count, outlier_bound, base_bound } => {
                write!(f, "outliers:{count},{outlier_bound},{base_bound}")
            }
            Self::Custom { bounds } if bounds.iter().all(|&b| b == 0.0) => write!(f, "none"),
            Self::Custom { bounds } => {
                let parts: Vec<String> = bounds.iter().map(|b| b.to_string()).collect();
                write!(f, "custom:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for NoiseScenario {
    type Err = Error;

    /// Accepts `s1`..`s4`, `none`, `state:B`, `torque:B`, `all:B`,
    /// `outliers:COUNT,OUTLIER,BASE` and `custom:B1,...,B12`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown noise scenario '{s}'"));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        match s.trim().to_ascii_lowercase().as_str() {
            "s1" => return Ok(Self::s1()),
            "s2" => return Ok(Self::s2()),
            "s3" => return Ok(Self::s3()),
            "s4" => return Ok(Self::s4()),
            "none" | "clean" | "zero" => return Ok(Self::zero()),
            _ => {}
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "state" => Ok(Self::StateNoise { bound: num(rest)? }),
            "torque" => Ok(Self::TorqueNoise { bound: num(rest)? }),
            "all" => Ok(Self::AllNoise { bound: num(rest)? }),
            "outliers" => {
                let v: Vec<&str> = rest.split(',').collect();
                if v.len() != 3 {
                    return Err(bad());
                }
                Ok(Self::Outliers {
                    count: v[0].trim().parse().map_err(|_| bad())?,
                    outlier_bound: num(v[1])?,
                    base_bound: num(v[2])?,
                })
            }
            "custom" => {
                let v = rest.split(',').map(num).collect::<Result<Vec<_>>>()?;
                let bounds: [f64; COMPONENTS_PER_SAMPLE] = v.try_into().map_err(|_| bad())?;
                Ok(Self::Custom { bounds })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corruption {
    pub scenario: NoiseScenario,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub true_params: RobotParams,
    pub g: GravityConstant,
    /// `None` for clean data.
    pub corruption: Option<Corruption>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    samples: Vec<Sample>,
    pub provenance: Provenance,
}

impl SampleSet {
    pub fn new(samples: Vec<Sample>, provenance: Provenance) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter("empty sample set".into()));
        }
        if samples.iter().any(|s| !s.components().iter().all(|x| x.is_finite()) || !s.time.is_finite()) {
            return Err(Error::NonFinite("sample set"));
        }
        Ok(Self { samples, provenance })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_clean(&self) -> bool {
        self.provenance.corruption.is_none()
    }

    pub fn sample_times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn scenario_label(&self) -> String {
        match &self.provenance.corruption {
            None => "clean".into(),
            Some(c) => c.scenario.to_string(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        out.write_record(CSV_HEADER).map_err(csv_err)?;
        for s in &self.samples {
            let mut row = vec![full_precision(s.time)];
            row.extend(s.components().iter().map(|&x| full_precision(x)));
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn sidecar(&self) -> String {
        let p = &self.provenance;
        let (scenario, seed) = match &p.corruption {
            None => ("clean".to_string(), String::new()),
            Some(c) => (c.scenario.to_string(), c.seed.to_string()),
        };
        format!(
            "# sample set provenance\n\
             m2={}\nm3={}\ns3z={}\ninertia_i={}\ng={}\nscenario={}\nseed={}\nsamples={}\n",
            full_precision(p.true_params.m2),
            full_precision(p.true_params.m3),
            full_precision(p.true_params.s3z),
            full_precision(p.true_params.inertia_i),
            full_precision(p.g.value()),
            scenario,
            seed,
            self.samples.len()
        )
    }

    /// Parses the CSV body and the key-value sidecar.
    pub fn parse<R: Read>(csv_body: R, sidecar: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(csv_body);
        let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?;
        if header.iter().map(str::trim).ne(CSV_HEADER) {
            return Err(Error::Parse(format!("unexpected CSV header {:?}", header)));
        }
        let mut samples = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let v: Vec<f64> = rec
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
            if v.len() != CSV_HEADER.len() {
                return Err(Error::Parse(format!("row {}: {} fields", line + 1, v.len())));
            }
            let mut state = [0.0; 9];
            state.copy_from_slice(&v[1..10]);
            samples.push(Sample {
                time: v[0],
                state: JointState::from_array(state),
                torque: [v[10], v[11], v[12]],
            });
        }
        let provenance = parse_sidecar(sidecar)?;
        Self::new(samples, provenance)
    }

    /// Writes `path` and the provenance sidecar `path.meta`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        fs::write(path, buf)?;
        fs::write(sidecar_path(path), self.sidecar())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = fs::read(path)?;
        let meta = fs::read_to_string(sidecar_path(path))?;
        Self::parse(&body[..], &meta)
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn parse_sidecar(text: &str) -> Result<Provenance> {
    let mut kv = std::collections::HashMap::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("sidecar line '{line}'")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| kv.get(k).ok_or_else(|| Error::Parse(format!("sidecar lacks '{k}'")));
    let num = |k: &str| -> Result<f64> {
        get(k)?.parse().map_err(|_| Error::Parse(format!("sidecar '{k}' is not a number")))
    };
    let true_params = RobotParams::new(num("m2")?, num("m3")?, num("s3z")?, num("inertia_i")?)?;
    let g = GravityConstant::new(num("g")?)?;
    let scenario = get("scenario")?;
    let corruption = if scenario == "clean" {
        None
    } else {
        let seed = get("seed")?
            .parse()
            .map_err(|_| Error::Parse("sidecar 'seed' is not an integer".into()))?;
        Some(Corruption { scenario: scenario.parse()?, seed })
    };
    Ok(Provenance { true_params, g, corruption })
}

/// Midpoint sample times `(k − ½)·10/n`, `k = 1..n`.
pub fn sample_times(n: usize) -> Vec<f64> {
    let step = TRAJECTORY_DURATION / n as f64;
    (1..=n).map(|k| (k as f64 - 0.5) * step).collect()
}

/// Clean samples of the excitation trajectory.
pub fn collect_samples(p: &RobotParams, g: GravityConstant, n: usize) -> Result<SampleSet> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n}")));
    }
    p.validate()?;
    let samples = sample_times(n)
        .into_iter()
        .map(|t| {
            let state = trajectory(t)?;
            Ok(Sample { time: t, state, torque: inverse_dynamics(p, &state, g) })
        })
        .collect::<Result<Vec<_>>>()?;
    SampleSet::new(samples, Provenance { true_params: *p, g, corruption: None })
}

/// Multiplies targeted components by `1 + u`, `u` uniform in `(−b, b)`.
///
/// For [`NoiseScenario::Outliers`] the outlier positions are drawn first,
/// without replacement over all `N·12` components; an outlier gets
/// `|u|` uniform in `(base_bound, outlier_bound)` with a random sign.
/// Draws then proceed sample by sample in CSV column order.
pub fn corrupt(clean: &SampleSet, scenario: &NoiseScenario, seed: u64) -> Result<SampleSet> {
    if let Some(c) = &clean.provenance.corruption {
        return Err(Error::AlreadyCorrupted(c.scenario.to_string()));
    }
    scenario.validate(clean.len())?;
    let mut rng = SeededRng::new(seed);
    let bounds = scenario.component_bounds();

    let outliers: HashSet<usize> = match *scenario {
        NoiseScenario::Outliers { count, .. } => {
            index::sample(&mut rng, clean.len() * COMPONENTS_PER_SAMPLE, count).into_iter().collect()
        }
        _ => HashSet::new(),
    };

    let samples = clean
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut c = s.components();
            for (j, x) in c.iter_mut().enumerate() {
                let u = match *scenario {
                    NoiseScenario::Outliers { outlier_bound, base_bound, .. }
                        if outliers.contains(&(i * COMPONENTS_PER_SAMPLE + j)) =>
                    {
                        let magnitude = loop {
                            let m = rng.uniform(base_bound, outlier_bound);
                            if m > base_bound {
                                break m;
                            }
                        };
                        if rng.next_unit() < 0.5 {
                            -magnitude
                        } else {
                            magnitude
                        }
                    }
                    _ => rng.symmetric_open(bounds[j]),
                };
                *x *= 1.0 + u;
            }
            s.with_components(c)
        })
        .collect();

    let mut provenance = clean.provenance.clone();
    provenance.corruption = Some(Corruption { scenario: scenario.clone(), seed });
    SampleSet::new(samples, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot::{alpha_from_params, check_bounds, regressor, TrajectoryBounds};

    fn clean(n: usize) -> SampleSet {
        collect_samples(&RobotParams::REFERENCE, GravityConstant::STANDARD, n).unwrap()
    }

    #[test]
    fn midpoint_times() {
        let t = sample_times(10);
        for (k, tk) in t.iter().enumerate() {
            assert!((tk - (0.5 + k as f64)).abs() < 1e-15);
        }
        assert!(collect_samples(&RobotParams::REFERENCE, GravityConstant::STANDARD, 1).is_err());
    }

    #[test]
    fn clean_samples_satisfy_factorization() {
        let set = clean(10);
        assert_eq!(set.len(), 10);
        assert!(set.is_clean());
        let alpha = alpha_from_params(&RobotParams::REFERENCE);
        for s in set.samples() {
            let tau = regressor(&s.state, GravityConstant::STANDARD).mul_vec(alpha.as_slice()).unwrap();
            for (a, b) in tau.iter().zip(&s.torque) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn twenty_samples_only_break_d2_floor() {
        let set = clean(20);
        assert_eq!(set.len(), 20);
        for s in set.samples() {
            for v in check_bounds(&s.state, &TrajectoryBounds::default()) {
                assert_eq!(v.name(), "d2 position min");
            }
        }
    }

    #[test]
    fn bound_holds_over_many_draws() {
        let mut rng = SeededRng::new(3);
        for _ in 0..100_000 {
            let x = 10.0 * (1.0 + rng.symmetric_open(0.2));
            assert!(x > 8.0 && x < 12.0);
        }
    }

    #[test]
    fn state_noise_leaves_torques() {
        let c = clean(10);
        let noisy = corrupt(&c, &NoiseScenario::s1(), 5).unwrap();
        for (a, b) in c.samples().iter().zip(noisy.samples()) {
            assert_eq!(a.torque.map(f64::to_bits), b.torque.map(f64::to_bits));
            assert_ne!(a.state, b.state);
        }
        let noisy = corrupt(&c, &NoiseScenario::s2(), 5).unwrap();
        for (a, b) in c.samples().iter().zip(noisy.samples()) {
            assert_eq!(a.state, b.state);
        }
    }

    #[test]
    fn all_noise_is_strictly_bounded() {
        let c = clean(20);
        for seed in 0..20 {
            let noisy = corrupt(&c, &NoiseScenario::s3(), seed).unwrap();
            for (a, b) in c.samples().iter().zip(noisy.samples()) {
                for (x, y) in a.components().iter().zip(b.components()) {
                    assert!(((y - x) / x).abs() < 0.2 + 1e-15);
                }
            }
        }
    }

    #[test]
    fn outlier_audit() {
        let c = clean(10);
        for seed in 0..50 {
            let noisy = corrupt(&c, &NoiseScenario::s4(), seed).unwrap();
            let mut large = 0;
            for (a, b) in c.samples().iter().zip(noisy.samples()) {
                for (x, y) in a.components().iter().zip(b.components()) {
                    let rel = ((y - x) / x).abs();
                    assert!(rel <= 0.70 + 1e-12);
                    if rel > 0.05 + 1e-12 {
                        large += 1;
                    }
                }
            }
            assert_eq!(large, 10, "seed {seed}");
        }
    }

    #[test]
    fn deterministic_and_single_use() {
        let c = clean(10);
        let a = corrupt(&c, &NoiseScenario::s3(), 9).unwrap();
        let b = corrupt(&c, &NoiseScenario::s3(), 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, corrupt(&c, &NoiseScenario::s3(), 10).unwrap());
        assert!(matches!(corrupt(&a, &NoiseScenario::s1(), 1), Err(Error::AlreadyCorrupted(_))));
        let z = corrupt(&c, &NoiseScenario::zero(), 1).unwrap();
        assert_eq!(z.samples(), c.samples());
    }

    #[test]
    fn scenario_validation_and_names() {
        let bad = NoiseScenario::Outliers { count: 121, outlier_bound: 0.7, base_bound: 0.05 };
        assert!(bad.validate(10).is_err());
        assert!(NoiseScenario::AllNoise { bound: 1.0 }.validate(10).is_err());
        for s in ["s1", "s2", "s3", "s4", "none", "all:0.1", "outliers:3,0.5,0.01"] {
            let parsed: NoiseScenario = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
        let custom: NoiseScenario = "custom:0,0,0,0,0,0,0,0,0,0.1,0.1,0.1".parse().unwrap();
        assert_eq!(custom.to_string().parse::<NoiseScenario>().unwrap(), custom);
        assert!("s5".parse::<NoiseScenario>().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let c = corrupt(&clean(10), &NoiseScenario::s4(), 77).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,theta1,d2,d3,theta1_dot,d2_dot,d3_dot,theta1_ddot,d2_ddot,d3_ddot,tau1,tau2,tau3\n"));
        assert_eq!(text.lines().count(), 11);
        let back = SampleSet::parse(&buf[..], &c.sidecar()).unwrap();
        assert_eq!(back, c);
    }
}
