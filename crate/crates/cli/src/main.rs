use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ldsparse::harness::{
    gen_corrupted, parse_settings, sweep, verify_lemmas, write_sweep_csv, Adversary, ScenarioConfig,
};
use ldsparse::{
    estimate_list, min_list_error, par, run_pipeline, Dataset, EstimatorConfig, FilterConfig,
    RoundingConfig, SparseOracle,
};

#[derive(Parser)]
#[command(
    name = "ldsparse",
    version,
    about = "List-decodable sparse mean estimation"
)]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Key-value file with scenario defaults; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a corrupted sample and write it as CSV plus the planted mean.
    Generate(GenerateArgs),
    /// Run the list estimator on a CSV or JSON-lines dataset.
    Estimate(EstimateArgs),
    /// Check the structural inequalities on random small instances.
    Verify(VerifyArgs),
    /// Sweep alpha and adversary, reporting list error per trial as CSV.
    Bench(BenchArgs),
}

/// Scenario settings shared by every subcommand that needs them.
#[derive(Args, Default)]
struct ScenarioArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    t: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Moment bound; defaults to the Gaussian value t^{t/2}.
    #[arg(long = "M")]
    moment_bound: Option<f64>,
    #[arg(long)]
    mu_norm: Option<f64>,
    #[arg(long)]
    adversary: Option<Adversary>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, env = "LDSPARSE_SEED")]
    seed: Option<u64>,
}

/// Estimator knobs.
#[derive(Args)]
struct EstimatorArgs {
    /// Pipeline rounds; defaults to ceil(24/alpha * ln 10).
    #[arg(long)]
    rounds: Option<usize>,
    /// Largest number of supports the exact oracle may enumerate.
    #[arg(long, default_value_t = ldsparse::oracle::DEFAULT_ENUM_BUDGET)]
    enum_budget: u128,
    /// Overrides the filter moment scale (default 2^t * 8 * M).
    #[arg(long)]
    meff: Option<f64>,
    /// Overrides the rounding overlap denominator (default 4608).
    #[arg(long)]
    delta_denominator: Option<f64>,
}

impl EstimatorArgs {
    fn config(&self) -> EstimatorConfig {
        EstimatorConfig {
            filter: FilterConfig {
                filter_moment: self.meff,
                soft_cap: None,
            },
            rounding: RoundingConfig {
                delta_denominator: self
                    .delta_denominator
                    .unwrap_or(ldsparse::rounding::DEFAULT_DELTA_DENOMINATOR),
            },
            merge_radius: None,
        }
    }

    fn oracle(&self) -> SparseOracle {
        SparseOracle::default().with_budget(self.enum_budget)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// CSV destination; the last column is the 0/1 inlier mask.
    #[arg(long)]
    out: PathBuf,
    /// JSON destination for the planted mean; defaults to `<out>.truth.json`.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// Input samples (.csv, .jsonl or .json).
    #[arg(long)]
    data: PathBuf,
    /// Planted mean as a JSON array, for error metrics.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// EstimateList JSON destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metrics JSON destination.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// JSON-lines filter trace of the first round.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, env = "LDSPARSE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    instances: usize,
    /// Report JSON destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// Comma-separated inlier fractions; defaults to the scenario alpha.
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Comma-separated adversaries; defaults to the scenario adversary.
    #[arg(long, value_delimiter = ',')]
    adversaries: Vec<Adversary>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn scenario(config_file: Option<&Path>, args: &ScenarioArgs) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    if let Some(path) = config_file {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        cfg.apply_settings(&parse_settings(&text)?)?;
    }
    if let Some(t) = args.t {
        cfg.t = t;
        cfg.moment_bound = ldsparse::params::gaussian_moment_bound(t);
    }
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = args.$f { cfg.$f = v; } )* };
    }
    set!(
        n,
        m,
        k,
        alpha,
        moment_bound,
        mu_norm,
        adversary,
        trials,
        seed
    );
    Ok(cfg)
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(path: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
    let mut w = writer(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn generate(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    let cfg = scenario(cli.config.as_deref(), &args.scenario)?;
    let s = gen_corrupted(&cfg)?;
    s.data.write_csv(&args.out)?;
    let truth = args.truth.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".truth.json");
        p.into()
    });
    write_json(Some(&truth), &s.mu_true)?;
    Ok(())
}

fn estimate(cli: &Cli, args: &EstimateArgs) -> Result<()> {
    let cfg = scenario(cli.config.as_deref(), &args.scenario)?;
    let data = Dataset::read_path(&args.data)
        .with_context(|| format!("reading {}", args.data.display()))?;
    let params = ldsparse::MomentParams::new(cfg.t, cfg.k, cfg.moment_bound, cfg.alpha)?;
    params.validate_for_dim(data.n())?;
    let est = args.estimator.config();
    let oracle = args.estimator.oracle();
    let rounds = args
        .estimator
        .rounds
        .unwrap_or_else(|| params.default_rounds());
    let seed = cfg.seed;

    let started = Instant::now();
    let list = estimate_list(&data, &params, &oracle, &est, rounds, seed)?;
    let elapsed = started.elapsed();

    if let Some(path) = &args.trace {
        // round 1 uses seed + 1
        let run = run_pipeline(&data, &params, &oracle, &est, seed.wrapping_add(1))?;
        run.filter
            .write_trace(BufWriter::new(File::create(path)?))?;
    }

    let mut w = writer(args.out.as_deref())?;
    w.write_all(list.to_json()?.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;

    if let Some(path) = &args.metrics {
        let mut metrics = serde_json::json!({
            "m": data.m(),
            "n": data.n(),
            "rounds": rounds,
            "list_size": list.len(),
            "fail_count": list.fail_count,
            "merge_radius": params.merge_radius(),
            "filter_moment": est.filter.filter_moment(&params),
            "workers": par::current_workers(),
            "elapsed_ms": elapsed.as_secs_f64() * 1e3,
        });
        if let Some(tp) = &args.truth {
            let mu: Vec<f64> = serde_json::from_str(&fs::read_to_string(tp)?)
                .with_context(|| format!("parsing {}", tp.display()))?;
            if mu.len() != data.n() {
                bail!("truth has dimension {}, data has {}", mu.len(), data.n());
            }
            metrics["min_list_error"] = min_list_error(&list, &mu).into();
            metrics["sample_mean_error"] = ldsparse::sparse::l2_dist(&data.mean(), &mu).into();
        }
        write_json(Some(path), &metrics)?;
    }
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    let report = verify_lemmas(args.seed, args.instances)?;
    write_json(args.out.as_deref(), &report)?;
    for l in &report.lemmas {
        eprintln!(
            "{:<32} {:>6} checks  {}",
            l.name,
            l.checks,
            if l.passed { "pass" } else { "FAIL" }
        );
    }
    Ok(report.passed)
}

fn bench(cli: &Cli, args: &BenchArgs) -> Result<()> {
    let cfg = scenario(cli.config.as_deref(), &args.scenario)?;
    let alphas = if args.alphas.is_empty() {
        vec![cfg.alpha]
    } else {
        args.alphas.clone()
    };
    let adversaries = if args.adversaries.is_empty() {
        vec![cfg.adversary]
    } else {
        args.adversaries.clone()
    };
    let rows = sweep(
        &cfg,
        &alphas,
        &adversaries,
        args.estimator.rounds,
        &args.estimator.oracle(),
        &args.estimator.config(),
    )?;
    write_sweep_csv(&rows, writer(args.out.as_deref())?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    par::with_workers(cli.workers, || match &cli.command {
        Command::Generate(a) => generate(&cli, a).map(|_| true),
        Command::Estimate(a) => estimate(&cli, a).map(|_| true),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(&cli, a).map(|_| true),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
