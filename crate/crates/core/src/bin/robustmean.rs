use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use robustmean::baselines::{
    coordinatewise_filter, geometric_median_of_means, oracle_truncated_mean, sample_mean, srm_bruteforce,
    OracleConfig, Radius,
};
use robustmean::bench::{self, TrialConfig, DEFAULT_DELTA_GRID, GMOM_TOL};
use robustmean::exec::init_thread_pool;
use robustmean::filter::{filter_multivariate, stopping_cap, EstimateReport, FilterConfig, StopMode};
use robustmean::interval::{interval_estimate_detailed, IntervalConfig};
use robustmean::netmax::{self, build_half_cover, CoverSet, InnerEstimator, NetConfig};
use robustmean::numeric::{ceil_count, two_log_steps, Confidence};
use robustmean::{Error, Execution, Result, SampleSet};

#[derive(Parser)]
#[command(name = "robustmean", version, about = "Robust mean estimation and benchmark sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run or summarize Monte-Carlo sweeps.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Estimate the mean of a CSV of samples (one row per sample).
    Estimate(EstimateArgs),
    /// Build and store sphere covers.
    #[command(subcommand)]
    Cover(CoverCommand),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Run a sweep described by a JSON config and write per-trial records.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run trials on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Aggregate a record CSV into Q_δ per (method, n, p).
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        /// Confidence level(s); defaults to 0.2, 0.1, 0.05, 0.02, 0.01.
        #[arg(long, num_args = 1..)]
        delta: Vec<f64>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CoverCommand {
    /// Build a half-cover of the unit sphere (or of its 2s-sparse vectors).
    Build {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        sparsity: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Mean,
    Gmom,
    Coord,
    Filter,
    Oracle,
    Srm,
    Interval,
    Net,
}

#[derive(Clone, Copy, ValueEnum)]
enum StopArg {
    Threshold,
    Fixed,
    Capped,
}

#[derive(Clone, Copy, ValueEnum)]
enum InnerArg {
    Interval,
    Filter,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Bound on the clean covariance operator norm (filter threshold rule).
    #[arg(long)]
    cov_bound: Option<f64>,
    #[arg(long, default_value_t = robustmean::filter::DEFAULT_THRESHOLD_FACTOR)]
    threshold_factor: f64,
    /// Removal count for fixed mode, or the cap for capped mode.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum)]
    stop_mode: Option<StopArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// GMOM block count; defaults to ⌈2 ln(1/δ)⌉.
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    /// Comma-separated true mean for the oracle estimator.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    true_mean: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = InnerArg::Interval)]
    inner: InnerArg,
    #[arg(long)]
    sparsity: Option<usize>,
    /// Precomputed cover CSV for the net estimator.
    #[arg(long)]
    cover: Option<PathBuf>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Argument(format!("cannot open {}: {e}", path.display())))
}

/// Numeric CSV, one sample per row. A first row that does not parse is taken
/// as a header.
fn read_samples(path: &Path) -> Result<SampleSet> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(open(path)?);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::Argument(format!("line {}: {e}", i + 1))),
        }
    }
    if rows.is_empty() {
        return Err(Error::Argument(format!("{} holds no samples", path.display())));
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::Argument("rows have differing column counts".into()));
    }
    SampleSet::from_rows(&rows)
}

fn filter_config(args: &EstimateArgs, n: usize) -> Result<FilterConfig> {
    let fixed = || -> Result<StopMode> {
        let steps = match args.steps {
            Some(s) => s,
            None => two_log_steps(Confidence::from_delta(args.delta)?),
        };
        Ok(StopMode::FixedSteps { steps })
    };
    let mode = match (args.stop_mode, args.cov_bound) {
        (Some(StopArg::Fixed), _) | (None, None) => fixed()?,
        (Some(StopArg::Threshold), _) | (None, Some(_)) => StopMode::Threshold,
        (Some(StopArg::Capped), _) => {
            let max_steps = match args.steps {
                Some(s) => s,
                None => {
                    let n_good = ceil_count((1.0 - args.epsilon) * n as f64) as usize;
                    stopping_cap(n, n_good.min(n), args.delta)?
                }
            };
            StopMode::Capped { max_steps }
        }
    };
    let cov_bound = match (mode, args.cov_bound) {
        (StopMode::FixedSteps { .. }, b) => b.unwrap_or(0.0),
        (_, Some(b)) => b,
        (_, None) => return Err(Error::Argument("--cov-bound is required for threshold and capped modes".into())),
    };
    let cfg = FilterConfig { cov_bound, threshold_factor: args.threshold_factor, stop_mode: mode, seed: args.seed };
    cfg.validate()?;
    Ok(cfg)
}

fn estimate(args: &EstimateArgs) -> Result<EstimateReport> {
    let samples = read_samples(&args.input)?;
    let conf = Confidence::from_delta(args.delta)?;
    match args.method {
        Method::Mean => Ok(EstimateReport::plain(sample_mean(&samples))),
        Method::Gmom => {
            let blocks = args.blocks.unwrap_or_else(|| two_log_steps(conf));
            Ok(EstimateReport::plain(geometric_median_of_means(&samples, blocks, GMOM_TOL)?))
        }
        Method::Coord => Ok(EstimateReport::plain(coordinatewise_filter(&samples, args.delta, args.seed)?)),
        Method::Filter => filter_multivariate(&samples, &filter_config(args, samples.n())?),
        Method::Oracle => {
            let true_mean =
                args.true_mean.clone().ok_or_else(|| Error::Argument("--true-mean is required for oracle".into()))?;
            let radius = args.radius.ok_or_else(|| Error::Argument("--radius is required for oracle".into()))?;
            let cfg = OracleConfig { true_mean, radius: Radius::Literal(radius) };
            Ok(EstimateReport::plain(oracle_truncated_mean(&samples, &cfg)?))
        }
        Method::Srm => Ok(EstimateReport::plain(srm_bruteforce(&samples, args.epsilon)?.estimate)),
        Method::Interval => {
            if samples.p() != 1 {
                return Err(Error::Argument(format!("interval expects one column, got {}", samples.p())));
            }
            let mut values = samples.column(0);
            if values.len() % 2 == 1 {
                eprintln!("note: dropping the last of {} rows to split evenly", values.len());
                values.pop();
            }
            let (est, _) = interval_estimate_detailed(&values, &IntervalConfig::new(args.epsilon, args.delta)?)?;
            Ok(EstimateReport::plain(vec![est]))
        }
        Method::Net => {
            let inner = match args.inner {
                InnerArg::Interval => InnerEstimator::Interval1d,
                InnerArg::Filter => match args.cov_bound {
                    Some(b) => InnerEstimator::Filter1d { cov_bound: Some(b), threshold_factor: args.threshold_factor },
                    None => InnerEstimator::filter_fixed(),
                },
            };
            let mut cfg = NetConfig::new(args.epsilon, args.delta, inner);
            cfg.sparsity = args.sparsity;
            match &args.cover {
                Some(path) => {
                    let cover = CoverSet::read_csv(open(path)?, args.sparsity.map(|s| 2 * s))?;
                    netmax::net_estimate_with_cover(&samples, &cfg, &cover, args.seed)
                }
                None => netmax::net_estimate(&samples, &cfg, args.seed),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bench(BenchCommand::Run { config, out, sequential }) => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", config.display())))?;
            let cfg = TrialConfig::from_json(&text)?;
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            let records = bench::run_sweep(&cfg, exec)?;
            bench::emit_csv(&records, &out)?;
            let failed = records.iter().filter(|r| r.failed()).count();
            eprintln!("{} records written to {} ({failed} failed)", records.len(), out.display());
        }
        Command::Bench(BenchCommand::Summarize { input, delta, out }) => {
            let records = bench::read_csv(open(&input)?)?;
            if records.is_empty() {
                return Err(Error::Argument(format!("{} holds no records", input.display())));
            }
            let deltas = if delta.is_empty() { DEFAULT_DELTA_GRID.to_vec() } else { delta };
            let rows = bench::summarize_grid(&records, &deltas)?;
            match out {
                Some(path) => bench::emit_summary_csv(&rows, &path)?,
                None => bench::write_summary(&rows, io::stdout().lock())?,
            }
        }
        Command::Estimate(args) => {
            let report = estimate(&args)?;
            let mut stdout = io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, &report)?;
            writeln!(stdout)?;
        }
        Command::Cover(CoverCommand::Build { p, sparsity, out, seed }) => {
            let cover = build_half_cover(p, sparsity, seed)?;
            cover.write_csv(File::create(&out)?)?;
            eprintln!("{} directions written to {}", cover.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(threads) = std::env::var("ROBUSTMEAN_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        init_thread_pool(threads);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
