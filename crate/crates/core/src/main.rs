use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use bridge_kmt::coupling::{Coupler, CouplingMode};
use bridge_kmt::density::Engine;
use bridge_kmt::harness::density_validation::parse_engines;
use bridge_kmt::harness::scaling::run_scaling_with;
use bridge_kmt::harness::{
    analyze, midpoint_spread, run_counterexample, run_density_validation, run_tails, write_json, write_rows,
    ExperimentKind, ExperimentSpec, Format, RowWriter, ZRule,
};
use bridge_kmt::jump_dist::{load_dist, CheckConfig};
use bridge_kmt::{Error, Result};

#[derive(Parser)]
#[command(name = "bridge-kmt", version, about = "Random walk bridge couplings and density engines")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
    #[arg(long, global = true, env = "BRIDGE_KMT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assumption checks for a jump law.
    Analyze {
        #[arg(long)]
        dist: String,
    },
    /// log f_N(z) from the selected engines.
    Density {
        #[arg(long)]
        dist: String,
        #[arg(long = "N", alias = "n", value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Endpoint S_N; overrides --z-rule.
        #[arg(long)]
        z: Option<f64>,
        #[arg(long, default_value = "mean")]
        z_rule: ZRule,
        /// saddle, fft, gauss or all.
        #[arg(long, default_value = "all")]
        engine: String,
    },
    /// Coupled bridge samples.
    Couple {
        #[arg(long)]
        dist: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        z: f64,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[command(flatten)]
        coupling: CouplingArgs,
        /// Adds s_t and b_t columns for every t.
        #[arg(long)]
        dump_paths: bool,
    },
    /// Δ quantiles across n with a log-growth fit.
    Scaling {
        #[arg(long)]
        dist: String,
        #[arg(long = "n-list", alias = "n", value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, default_value = "mean")]
        z_rule: ZRule,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Exponent a of the E[exp(aΔ)] estimate.
        #[arg(long, default_value_t = 0.1)]
        exp_a: f64,
        #[command(flatten)]
        coupling: CouplingArgs,
    },
    /// Survival of Δ past M₀ log n with a fitted exponential rate.
    Tails {
        #[arg(long)]
        dist: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "mean")]
        z_rule: ZRule,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[command(flatten)]
        coupling: CouplingArgs,
    },
    /// Exact two-step spiky bridge for each m.
    Counterexample {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        m: Vec<u32>,
        /// Contrast laws: midpoint spread at n = 2.
        #[arg(long)]
        contrast: Vec<String>,
    },
}

#[derive(Args)]
struct CouplingArgs {
    #[arg(long, default_value = "pure_quantile")]
    mode: CouplingMode,
    #[arg(long, default_value_t = 16)]
    n_min: usize,
    #[arg(long, default_value_t = 0.05)]
    eps3: f64,
    #[arg(long)]
    ref_slope: Option<f64>,
    #[arg(long, default_value = "auto")]
    density_engine: Engine,
}

fn dist_value(arg: &str) -> Result<Value> {
    load_dist(arg)?;
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::Spec(format!("reading {arg}: {e}")))?
    };
    Ok(serde_json::from_str(&text)?)
}

fn experiment(cli: &Cli, kind: ExperimentKind, dist: &str, n_list: Vec<usize>, samples: usize) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::new(kind, dist_value(dist)?).with_n_list(n_list).with_samples(samples).with_seed(cli.seed);
    spec.format = cli.format;
    spec.output = cli.out.as_ref().map(|p| p.display().to_string());
    Ok(spec)
}

fn apply(spec: &mut ExperimentSpec, c: &CouplingArgs) {
    spec.mode = c.mode;
    spec.n_min = c.n_min;
    spec.eps3 = c.eps3;
    spec.ref_slope = c.ref_slope;
    spec.engine = c.density_engine;
}

/// Summary objects go to a sidecar next to `--out`, and always to stderr.
fn summary<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    if let Some(p) = out {
        let mut name = p.as_os_str().to_owned();
        name.push(".summary.json");
        write_json(Path::new(&name), value)?;
    }
    eprintln!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Analyze { dist } => {
            let d = load_dist(dist)?;
            let report = analyze(&d, &CheckConfig::default())?;
            write_rows(out, cli.format, &report.checks)?;
            summary(out, &report)
        }
        Command::Density { dist, n, z, z_rule, engine } => {
            let mut spec = experiment(cli, ExperimentKind::Density, dist, n.clone(), 1)?;
            spec.z_rule = z.map(ZRule::Fixed).unwrap_or(*z_rule);
            let v = run_density_validation(&spec, &parse_engines(engine)?)?;
            write_rows(out, cli.format, &v.rows)?;
            summary(out, &v.rate_fit)
        }
        Command::Couple { dist, n, z, samples, coupling, dump_paths } => {
            let mut spec = experiment(cli, ExperimentKind::Couple, dist, vec![*n], *samples)?;
            apply(&mut spec, coupling);
            spec.validate()?;
            let mut cfg = spec.coupler_config(*n);
            cfg.rng_seed = cli.seed;
            let coupler = Coupler::new(&spec.distribution()?, *n, *z, cfg)?;
            let mut w = RowWriter::create(out, cli.format)?;
            for i in 0..*samples as u64 {
                let s = coupler.sample(i)?;
                let mut row = Map::new();
                row.insert("seed_path".into(), Value::from(format!("{}/{}", cli.seed, i)));
                row.insert("z".into(), Value::from(s.z));
                row.insert("delta".into(), Value::from(s.delta));
                row.insert("midpoint_W".into(), s.midpoint_w.map_or(Value::Null, Value::from));
                if *dump_paths {
                    for (t, v) in s.s_path.iter().enumerate() {
                        row.insert(format!("s_{t}"), Value::from(*v));
                    }
                    for (t, v) in s.b_path.iter().enumerate() {
                        row.insert(format!("b_{t}"), Value::from(*v));
                    }
                }
                w.push(&row)?;
            }
            w.finish()
        }
        Command::Scaling { dist, n_list, z_rule, samples, exp_a, coupling } => {
            let mut spec = experiment(cli, ExperimentKind::Scaling, dist, n_list.clone(), *samples)?;
            spec.z_rule = *z_rule;
            spec.exp_a = *exp_a;
            apply(&mut spec, coupling);
            let mut w = RowWriter::create(out, cli.format)?;
            let result = run_scaling_with(&spec, |row| w.push(row));
            w.finish()?;
            let result = result?;
            summary(out, &serde_json::json!({"fit": result.fit, "failures": result.failures}))?;
            if result.rows.is_empty() {
                return Err(Error::Spec("every n in the sweep failed".into()));
            }
            Ok(())
        }
        Command::Tails { dist, n, z_rule, samples, coupling } => {
            let mut spec = experiment(cli, ExperimentKind::Tails, dist, vec![*n], *samples)?;
            spec.z_rule = *z_rule;
            apply(&mut spec, coupling);
            let t = run_tails(&spec)?;
            write_rows(out, cli.format, &t.rows)?;
            summary(
                out,
                &serde_json::json!({
                    "n": t.n, "z": t.z, "samples": t.samples, "m0": t.m0, "lambda": t.lambda,
                    "log_k": t.log_k, "r2": t.r2, "window": t.window, "window_points": t.window_points,
                }),
            )
        }
        Command::Counterexample { m, contrast } => {
            let rows = run_counterexample(m)?;
            write_rows(out, cli.format, &rows)?;
            let mut spread = Vec::new();
            for c in contrast {
                spread.extend(midpoint_spread(&load_dist(c)?)?);
            }
            if spread.is_empty() {
                Ok(())
            } else {
                summary(out, &spread)
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_spec_error() { 2 } else { 3 })
        }
    }
}
