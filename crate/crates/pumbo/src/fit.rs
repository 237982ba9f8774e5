//! The `fit` command: train on a file, evaluate on another, report as JSON.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use pumbo_core::points::normalize;
use pumbo_core::{bo_pum, AffineMap, FitResult, PipelineConfig, Points};

use crate::csvio::{format_f64, load_csv};
use crate::error::{CliError, Result};

/// Where the training and evaluation points come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// Separate files; without an evaluation file the training points are used.
    Files { train: PathBuf, eval: Option<PathBuf> },
    /// One file split at random into `train_size` training rows and the rest.
    Split { data: PathBuf, train_size: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitJob {
    pub source: Source,
    pub pipeline: PipelineConfig,
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct FitReport {
    pub config: PipelineConfig,
    pub n_train: usize,
    pub n_eval: usize,
    /// Map from input coordinates to the unit cube, fitted on the training points.
    pub map: AffineMap,
    pub degenerate_axes: Vec<usize>,
    pub train_rows_dropped: Vec<usize>,
    pub eval_rows_dropped: Vec<usize>,
    pub result: FitResult,
}

pub struct FitOutput {
    pub report: FitReport,
    /// Evaluation points in input units.
    pub eval_points: Points,
    pub eval_truth: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

pub fn run_fit(job: &FitJob) -> Result<FitOutput> {
    let mut warnings = Vec::new();
    let (train, eval, train_dropped, eval_dropped) = match &job.source {
        Source::Files { train, eval } => {
            let t = load_csv(train)?;
            if t.set.values().is_none() {
                return Err(CliError::Data { path: train.clone(), msg: "training file needs an `f` column".into() });
            }
            let e = match eval {
                Some(p) => load_csv(p)?,
                None => t.clone(),
            };
            (t.set, e.set, t.dropped_rows, e.dropped_rows)
        }
        Source::Split { data, train_size } => {
            let d = load_csv(data)?;
            if d.set.values().is_none() {
                return Err(CliError::Data { path: data.clone(), msg: "data file needs an `f` column".into() });
            }
            if *train_size == 0 || *train_size >= d.set.len() {
                return Err(CliError::usage(format!(
                    "--train-size must lie in 1..{} for {} distinct rows",
                    d.set.len(),
                    d.set.len()
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(job.pipeline.bo.seed);
            let (t, e) = d.set.split_random(*train_size, &mut rng)?;
            (t, e, d.dropped_rows, Vec::new())
        }
    };
    if !train_dropped.is_empty() {
        warnings.push(format!("dropped {} repeated training rows", train_dropped.len()));
    }

    let norm = normalize(&train)?;
    for &a in &norm.degenerate_axes {
        warnings.push(format!("axis x{} is constant in the training data; mapped to 0.5", a + 1));
    }
    if eval.dim() != train.dim() {
        return Err(pumbo_core::Error::DimensionMismatch { expected: train.dim(), got: eval.dim() }.into());
    }
    let eval_unit = norm.map.apply(eval.points())?;
    let truth = eval.values();
    let result = bo_pum(&norm.set, &eval_unit, truth, &job.pipeline)?;
    if !result.diagnostics.clamped.is_empty() {
        warnings.push(format!(
            "{} evaluation points lie outside the training box and were clamped",
            result.diagnostics.clamped.len()
        ));
    }
    if !result.diagnostics.uncovered.is_empty() {
        warnings.push(format!("{} evaluation points fell outside every subdomain", result.diagnostics.uncovered.len()));
    }

    let report = FitReport {
        config: job.pipeline,
        n_train: train.len(),
        n_eval: eval.len(),
        map: norm.map,
        degenerate_axes: norm.degenerate_axes,
        train_rows_dropped: train_dropped,
        eval_rows_dropped: eval_dropped,
        result,
    };
    let (eval_points, eval_truth) = eval.into_parts();
    Ok(FitOutput { report, eval_points, eval_truth, warnings })
}

pub fn write_report(path: &Path, report: &FitReport) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| CliError::io(path, e))
}

/// `predictions.csv` (input units) and `subdomains.csv` (unit cube) in `dir`.
pub fn write_plot_data(dir: &Path, out: &FitOutput) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let result = &out.report.result;

    let path = dir.join("predictions.csv");
    let write = || -> std::io::Result<()> {
        let mut w = BufWriter::new(fs::File::create(&path)?);
        let d = out.eval_points.dim();
        let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        header.push("prediction".into());
        if out.eval_truth.is_some() {
            header.push("f".into());
        }
        writeln!(w, "{}", header.join(","))?;
        for (i, p) in out.eval_points.iter().enumerate() {
            let mut cells: Vec<String> = p.iter().map(|c| format_f64(*c)).collect();
            cells.push(format_f64(result.predictions[i]));
            if let Some(t) = &out.eval_truth {
                cells.push(format_f64(t[i]));
            }
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()
    };
    write().map_err(|e| CliError::io(&path, e))?;

    let path = dir.join("subdomains.csv");
    let write = || -> std::io::Result<()> {
        let mut w = BufWriter::new(fs::File::create(&path)?);
        let layout = &result.layout;
        let mut header: Vec<String> = (1..=layout.dim()).map(|i| format!("c{i}")).collect();
        header.extend(["delta_start", "delta", "epsilon", "trials"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for j in 0..layout.len() {
            let mut cells: Vec<String> = layout.center(j).iter().map(|c| format_f64(*c)).collect();
            cells.push(format_f64(result.delta_start[j]));
            cells.push(format_f64(layout.radii[j]));
            cells.push(format_f64(layout.shapes[j]));
            cells.push(result.traces[j].len().to_string());
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()
    };
    write().map_err(|e| CliError::io(&path, e))
}
