use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use swarm_ident::harness::{
    emit_table, estimate_method, run_benchmark, run_study, BenchmarkConfig, Method, TableFormat,
};
use swarm_ident::robot::{trajectory, GravityConstant, JointState, RobotParams};
use swarm_ident::sampling::{collect_samples, corrupt, full_precision, NoiseScenario, SampleSet};
use swarm_ident::{Error, Result};

/// Dynamic parameter identification of a cylindrical robot with LS, TLS, RLS
/// and particle swarm estimators.
///
/// Masses are in kg, lengths in m, inertia in kg·m², g in m/s², time in s.
#[derive(Parser, Debug)]
#[command(name = "swarm-ident", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the reference trajectory without noise and write a sample CSV
    /// plus its `.meta` sidecar.
    GenData {
        /// Number of samples, taken at interval midpoints over [0, 10] s.
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// True parameters m2 [kg], m3 [kg], s3z [m], I [kg·m²].
        #[arg(long, default_value = "5,3,-0.5,3", allow_hyphen_values = true)]
        params: String,
        /// Gravitational acceleration [m/s²].
        #[arg(long, default_value_t = 9.81)]
        g: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a noise scenario to a clean sample CSV.
    Corrupt {
        #[arg(long = "in")]
        input: PathBuf,
        /// s1 (20% state), s2 (20% torque), s3 (20% all), s4 (10 outliers up
        /// to 70%, 5% elsewhere), none, state:B, torque:B, all:B,
        /// outliers:COUNT,OUTLIER,BASE or custom:B1,...,B12.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the parameters of a sample CSV with one method; prints one
    /// CSV record (m2, m3, -s3z, I, seconds, flags).
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        /// ls, tls, rls, ls-rel, tls-rel, rls-rel or pso-f1..pso-f16.
        #[arg(long)]
        method: String,
        /// PSO seeds, comma separated [default: 1..10].
        #[arg(long, value_delimiter = ',')]
        pso_seeds: Option<Vec<u64>>,
    },
    /// Run every configured method on one corrupted data set.
    Bench {
        /// TOML benchmark config; omitted keys take their defaults.
        #[arg(long)]
        config: PathBuf,
        /// csv or markdown.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Output file [default: standard output].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat the benchmark over data seeds 1..N and scenarios; writes error
    /// statistics per method as CSV.
    Study {
        #[arg(long)]
        config: PathBuf,
        /// Number of data seeds.
        #[arg(long, default_value_t = 30)]
        seeds: u64,
        /// Comma-separated scenarios.
        #[arg(long, value_delimiter = ',', default_value = "s1,s2,s3,s4")]
        scenarios: Vec<String>,
        /// Output file [default: standard output].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the reference trajectory state at one time.
    Trajectory {
        /// Time [s] in [0, 10].
        #[arg(long, allow_hyphen_values = true)]
        at: f64,
    },
}

fn parse_params(s: &str) -> Result<RobotParams> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad parameter list '{s}'"))))
        .collect::<Result<Vec<f64>>>()?;
    let a: [f64; 4] = v.try_into().map_err(|_| Error::Parse(format!("expected 4 parameters, got '{s}'")))?;
    RobotParams::new(a[0], a[1], a[2], a[3])
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_config(path: &Path) -> Result<BenchmarkConfig> {
    let cfg = BenchmarkConfig::from_toml(&fs::read_to_string(path)?)?;
    eprintln!("# resolved config\n{}", cfg.to_toml());
    Ok(cfg)
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenData { samples, params, g, out } => {
            let p = parse_params(&params)?;
            let g = GravityConstant::new(g)?;
            eprintln!("# samples={samples} {p} g={}", g.value());
            collect_samples(&p, g, samples)?.save(&out)
        }
        Command::Corrupt { input, scenario, seed, out } => {
            let scenario: NoiseScenario = scenario.parse()?;
            let clean = SampleSet::load(&input)?;
            eprintln!("# in={} scenario={scenario} seed={seed}", input.display());
            corrupt(&clean, &scenario, seed)?.save(&out)
        }
        Command::Estimate { input, method, pso_seeds } => {
            let method: Method = method.parse()?;
            let set = SampleSet::load(&input)?;
            let mut cfg = BenchmarkConfig { methods: vec![method], ..Default::default() };
            if let Some(seeds) = pso_seeds {
                cfg.pso.runs_per_estimate = seeds.len();
                cfg.pso_seeds = seeds;
            }
            cfg.validate()?;
            let seeds: Vec<String> = cfg.pso_seeds.iter().map(u64::to_string).collect();
            eprintln!(
                "# in={} method={method} g={} pso_seeds={}",
                input.display(),
                set.provenance.g.value(),
                seeds.join(",")
            );
            let rec = estimate_method(method, &set, &cfg);
            write_output(None, &emit_table(&[rec], TableFormat::Csv))
        }
        Command::Bench { config, format, out } => {
            let format: TableFormat = format.parse()?;
            let cfg = load_config(&config)?;
            let records = run_benchmark(&cfg)?;
            write_output(out.as_deref(), &emit_table(&records, format))
        }
        Command::Study { config, seeds, scenarios, out } => {
            let cfg = load_config(&config)?;
            let scenarios = scenarios.iter().map(|s| s.parse()).collect::<Result<Vec<NoiseScenario>>>()?;
            let seed_list: Vec<u64> = (1..=seeds).collect();
            let result = run_study(&cfg, &scenarios, &seed_list)?;
            write_output(out.as_deref(), &result.to_csv())
        }
        Command::Trajectory { at } => {
            let s = trajectory(at)?;
            let text: String = JointState::NAMES
                .iter()
                .zip(s.to_array())
                .map(|(n, v)| format!("{n} {}\n", full_precision(v)))
                .collect();
            write_output(None, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
