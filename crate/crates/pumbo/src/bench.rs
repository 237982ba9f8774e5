//! Benchmark grid over training sizes, tolerances and kernels on a test function.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use pumbo_core::{bo_pum, gen_testdata, BoConfig, KernelFamily, PipelineConfig, TestFunction, Timings};

use crate::error::{CliError, Result};

/// Offset between the training and the test seed, so the two sets never coincide.
const TEST_SEED_OFFSET: u64 = 0x7e57_5e7d;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub fun: TestFunction,
    pub kernels: Vec<KernelFamily>,
    pub sizes: Vec<usize>,
    pub taus: Vec<f64>,
    pub seed: u64,
    pub test_size: usize,
    /// Search settings; `tau` is replaced per cell.
    pub bo: BoConfig,
    pub min_pts: usize,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kernels.is_empty() || self.sizes.is_empty() || self.taus.is_empty() {
            return Err(CliError::usage("kernels, sizes and taus must each list at least one value"));
        }
        if self.test_size == 0 {
            return Err(CliError::usage("test size must be at least 1"));
        }
        if let Some(t) = self.taus.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(CliError::usage(format!("invalid tolerance {t}")));
        }
        self.bo.validate()?;
        Ok(())
    }
}

/// One cell of the benchmark grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub function: String,
    pub n: usize,
    pub tau: f64,
    pub kernel: String,
    /// `ok`, or the error that stopped this cell.
    pub status: String,
    pub mae: Option<f64>,
    pub rmae: Option<f64>,
    pub rrmse: Option<f64>,
    pub relative_excluded: Option<usize>,
    pub subdomains: Option<usize>,
    /// Mean number of search trials per subdomain.
    pub mean_trials: Option<f64>,
    pub time_s: f64,
    pub timings: Option<Timings>,
}

pub fn test_seed(seed: u64) -> u64 {
    seed.wrapping_add(TEST_SEED_OFFSET)
}

/// Runs every `(kernel, τ, N)` cell in that nesting order. A failing cell is
/// recorded in its row and the run continues.
pub fn run_benchmark(cfg: &BenchConfig, mut progress: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let test = gen_testdata(cfg.fun, cfg.test_size, test_seed(cfg.seed))?;
    let mut rows = Vec::new();
    for &kernel in &cfg.kernels {
        for &tau in &cfg.taus {
            for &n in &cfg.sizes {
                let start = Instant::now();
                let mut row = BenchRow {
                    function: cfg.fun.to_string(),
                    n,
                    tau,
                    kernel: kernel.to_string(),
                    status: "ok".into(),
                    mae: None,
                    rmae: None,
                    rrmse: None,
                    relative_excluded: None,
                    subdomains: None,
                    mean_trials: None,
                    time_s: 0.0,
                    timings: None,
                };
                let pipeline = PipelineConfig { family: kernel, bo: BoConfig { tau, ..cfg.bo }, min_pts: cfg.min_pts };
                let outcome = gen_testdata(cfg.fun, n, cfg.seed)
                    .and_then(|train| bo_pum(&train, test.points(), test.values(), &pipeline));
                match outcome {
                    Ok(fit) => {
                        if let Some(m) = fit.metrics {
                            row.mae = Some(m.mae);
                            row.rmae = Some(m.rmae);
                            row.rrmse = Some(m.rrmse);
                            row.relative_excluded = Some(m.relative_excluded);
                        }
                        let trials: usize = fit.traces.iter().map(|t| t.len()).sum();
                        row.subdomains = Some(fit.layout.len());
                        row.mean_trials = Some(trials as f64 / fit.traces.len().max(1) as f64);
                        row.timings = Some(fit.timings);
                    }
                    Err(e) => row.status = format!("error: {e}"),
                }
                row.time_s = start.elapsed().as_secs_f64();
                progress(&row);
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn sci(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// Result table without wall-clock columns, so reruns compare byte for byte.
pub fn write_table<W: Write>(out: W, rows: &[BenchRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "function",
        "n",
        "tau",
        "kernel",
        "status",
        "mae",
        "rmae",
        "rrmse",
        "relative_excluded",
        "subdomains",
        "mean_trials",
    ])?;
    for r in rows {
        w.write_record([
            r.function.clone(),
            r.n.to_string(),
            format!("{:e}", r.tau),
            r.kernel.clone(),
            r.status.clone(),
            sci(r.mae),
            sci(r.rmae),
            sci(r.rrmse),
            opt(r.relative_excluded),
            opt(r.subdomains),
            opt(r.mean_trials),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Wall-clock seconds per cell and phase.
pub fn write_timings<W: Write>(out: W, rows: &[BenchRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["function", "n", "tau", "kernel", "time_s", "radius_search_s", "bo_s", "blend_s"])?;
    for r in rows {
        let t = r.timings.unwrap_or_default();
        w.write_record([
            r.function.clone(),
            r.n.to_string(),
            format!("{:e}", r.tau),
            r.kernel.clone(),
            format!("{:.6}", r.time_s),
            format!("{:.6}", t.radius_search),
            format!("{:.6}", t.bo),
            format!("{:.6}", t.blend),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One `n,mae,rmae,rrmse` series per `(kernel, τ)` in `dir`.
pub fn write_plot_data(dir: &Path, rows: &[BenchRow]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut series: Vec<(String, Vec<&BenchRow>)> = Vec::new();
    for r in rows {
        let name = format!("mae_vs_n_{}_{}_tau{:e}.csv", r.function, r.kernel, r.tau);
        match series.iter_mut().find(|(n, _)| *n == name) {
            Some((_, v)) => v.push(r),
            None => series.push((name, vec![r])),
        }
    }
    for (name, rs) in series {
        let path = dir.join(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let res: csv::Result<()> = (|| {
            w.write_record(["n", "mae", "rmae", "rrmse"])?;
            for r in rs {
                w.write_record([r.n.to_string(), sci(r.mae), sci(r.rmae), sci(r.rrmse)])?;
            }
            w.flush()?;
            Ok(())
        })();
        res.map_err(|e| CliError::Data { path: path.clone(), msg: e.to_string() })?;
    }
    Ok(())
}
