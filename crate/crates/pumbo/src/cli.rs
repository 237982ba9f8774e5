//! Argument parsing and command dispatch for the `pumbo` binary.

use std::ffi::OsString;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use pumbo_core::{gen_testdata, BoConfig, KernelFamily, PipelineConfig, TestFunction};

use crate::bench::{self, BenchConfig};
use crate::csvio::save_csv;
use crate::error::{exit, CliError, Result};
use crate::fit::{self, FitJob, Source};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PUMBO_THREADS";

#[derive(Debug, Parser)]
#[command(name = "pumbo", version, about = "Partition-of-unity RBF interpolation with Bayesian parameter tuning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a test function at seeded uniform random points.
    Gen(GenArgs),
    /// Fit training data and evaluate the interpolant.
    Fit(FitArgs),
    /// Run a grid of fits on a test function and tabulate the errors.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long = "fn", value_name = "f1|f2")]
    pub fun: TestFunction,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Search settings shared by `fit` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Exploration margin of Expected Improvement.
    #[arg(long, default_value_t = 0.15)]
    pub xi: f64,
    /// Random trials before the surrogate is used.
    #[arg(long, default_value_t = 5)]
    pub nstart: usize,
    /// Surrogate-guided trials.
    #[arg(long, default_value_t = 25)]
    pub niter: usize,
    #[arg(long, default_value_t = 20.0)]
    pub eps_max: f64,
    /// Candidates scored per proposal.
    #[arg(long, default_value_t = 2048)]
    pub candidates: usize,
    /// Fraction of each subdomain held out for validation.
    #[arg(long, default_value_t = 0.2)]
    pub split_fraction: f64,
    /// Minimum number of points per subdomain.
    #[arg(long, default_value_t = 15)]
    pub min_pts: usize,
}

impl SearchArgs {
    fn bo(&self, tau: f64, seed: u64) -> BoConfig {
        BoConfig {
            eps_max: self.eps_max,
            nstart: self.nstart,
            niter: self.niter,
            xi: self.xi,
            tau,
            n_candidates: self.candidates,
            split_fraction: self.split_fraction,
            seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Training CSV with header `x1,...,xd,f`.
    #[arg(long, required_unless_present = "data", conflicts_with = "data")]
    pub train: Option<PathBuf>,
    /// Evaluation CSV; an `f` column enables error metrics. Defaults to the training points.
    #[arg(long, requires = "train")]
    pub eval: Option<PathBuf>,
    /// Single CSV to split at random into training and evaluation rows.
    #[arg(long, requires = "train_size")]
    pub data: Option<PathBuf>,
    #[arg(long, requires = "data")]
    pub train_size: Option<usize>,
    #[arg(long, default_value = "gaussian")]
    pub kernel: KernelFamily,
    #[arg(long, default_value_t = 1e-4)]
    pub tau: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report path.
    #[arg(long)]
    pub out: PathBuf,
    /// Directory for prediction and subdomain CSV files.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long = "fn", value_name = "f1|f2")]
    pub fun: TestFunction,
    #[arg(long, value_delimiter = ',', default_value = "gaussian")]
    pub kernels: Vec<KernelFamily>,
    #[arg(long, value_delimiter = ',', default_value = "2000,4000,8000,16000")]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1e-4")]
    pub taus: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub test_size: usize,
    /// Result table; timings go to `<stem>.timings.csv`, full rows to `<stem>.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Directory for MAE-vs-N series.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

/// Parses `args`, runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads(std::env::var(THREADS_ENV).ok().as_deref()) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match dispatch(cli.command) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads(value: Option<&str>) -> Result<()> {
    let Some(v) = value.map(str::trim).filter(|v| !v.is_empty()) else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot start {n} worker threads: {e}")))
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Gen(a) => {
            let set = gen_testdata(a.fun, a.n, a.seed)?;
            save_csv(&a.out, &set)
        }
        Command::Fit(a) => run_fit(a),
        Command::Bench(a) => run_bench(a),
    }
}

fn run_fit(a: FitArgs) -> Result<()> {
    let source = match (a.train, a.data, a.train_size) {
        (Some(train), None, None) => Source::Files { train, eval: a.eval },
        (None, Some(data), Some(train_size)) => Source::Split { data, train_size },
        _ => return Err(CliError::usage("give either --train [--eval] or --data with --train-size")),
    };
    let pipeline = PipelineConfig { family: a.kernel, bo: a.search.bo(a.tau, a.seed), min_pts: a.search.min_pts };
    let job = FitJob { source, pipeline, plot_data: a.plot_data };
    let out = fit::run_fit(&job)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    fit::write_report(&a.out, &out.report)?;
    if let Some(dir) = &job.plot_data {
        fit::write_plot_data(dir, &out)?;
    }
    if let Some(m) = out.report.result.metrics {
        println!("mae {:e} rmae {:e} rrmse {:e}", m.mae, m.rmae, m.rrmse);
    }
    Ok(())
}

/// `table.csv` → `table.<suffix>`.
fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "bench".into());
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn run_bench(a: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        fun: a.fun,
        kernels: a.kernels,
        sizes: a.sizes,
        taus: a.taus,
        seed: a.seed,
        test_size: a.test_size,
        bo: a.search.bo(0.0, a.seed),
        min_pts: a.search.min_pts,
    };
    let rows = bench::run_benchmark(&cfg, |r| {
        eprintln!(
            "{} n={} tau={:e} {}: {} ({:.2}s)",
            r.function,
            r.n,
            r.tau,
            r.kernel,
            r.mae.map_or(r.status.clone(), |m| format!("mae {m:e}")),
            r.time_s
        );
    })?;

    let write_csv = |path: &Path, f: &dyn Fn(fs::File) -> csv::Result<()>| -> Result<()> {
        let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        f(file).map_err(|e| CliError::Data { path: path.to_path_buf(), msg: e.to_string() })
    };
    write_csv(&a.out, &|f| bench::write_table(BufWriter::new(f), &rows))?;
    write_csv(&sidecar(&a.out, "timings.csv"), &|f| bench::write_timings(BufWriter::new(f), &rows))?;
    let json = sidecar(&a.out, "json");
    let file = fs::File::create(&json).map_err(|e| CliError::io(&json, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &rows)?;
    if let Some(dir) = &a.plot_data {
        bench::write_plot_data(dir, &rows)?;
    }
    Ok(())
}
