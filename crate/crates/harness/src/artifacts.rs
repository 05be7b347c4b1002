//! Files written by `run` and `compare`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use adm_core::{Algorithm, QuadraticGameRecord, RunStatus, RunTrace64};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiment::{best_rows, sweep_cells, CellResult, Setup, SummaryRow, SweepGrid};
use crate::HarnessError;

pub const TRACE_HEADER: [&str; 5] = ["k", "dist_sq", "residual", "perp", "bound"];
pub const SUMMARY_HEADER: [&str; 9] =
    ["algorithm", "alpha", "iterations_to_tol", "fitted_rho", "epsilon", "bound_holds", "label", "lambda", "status"];
/// First line of `summary.csv` and `sweep.csv`.
pub const COMPARISON_NOTE: &str = "# comparison set: adm, ddp";
pub const NOT_REACHED: &str = "not reached";

/// Shortest round-trip decimal in scientific notation.
fn num(v: f64) -> String {
    format!("{v:e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io(path.to_path_buf(), e)
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::Csv(path.to_path_buf(), e.to_string())
}

pub fn write_trace_csv(path: &Path, trace: &RunTrace64) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(TRACE_HEADER).map_err(csv_err(path))?;
    for r in &trace.records {
        let bound = r.bound.map(num).unwrap_or_default();
        w.write_record([r.k.to_string(), num(r.dist_sq), num(r.residual), num(r.perp), bound]).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow], extra: Option<(&str, Vec<String>)>) -> Result<(), HarnessError> {
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    writeln!(file, "{COMPARISON_NOTE}").map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = SUMMARY_HEADER.to_vec();
    if let Some((name, _)) = &extra {
        header.push(name);
    }
    w.write_record(&header).map_err(csv_err(path))?;
    for (i, r) in rows.iter().enumerate() {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        let mut rec = vec![
            r.algorithm.to_string(),
            num(r.alpha),
            r.iterations_to_tol.map(|k| k.to_string()).unwrap_or_else(|| NOT_REACHED.to_string()),
            opt(r.fitted_rho),
            opt(r.epsilon),
            r.bound_holds.map(|b| b.to_string()).unwrap_or_default(),
            r.label.clone(),
            num(r.lambda),
            r.status.clone(),
        ];
        if let Some((_, values)) = &extra {
            rec.push(values[i].clone());
        }
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_toml<S: Serialize>(path: &Path, value: &S) -> Result<(), HarnessError> {
    let text = toml::to_string(value).map_err(|e| HarnessError::Config(e.to_string()))?;
    fs::write(path, text).map_err(io_err(path))
}

/// Sidecar of a trace CSV.
#[derive(Debug, Clone, Serialize)]
pub struct TraceMeta {
    pub label: String,
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub lambda: f64,
    pub seed: u64,
    pub n: usize,
    pub k_max: usize,
    pub stop_tol: f64,
    pub records: usize,
    pub status: RunStatus,
    pub d1_sq: Option<f64>,
    pub bound_holds: Option<bool>,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub setup: Setup,
    pub results: Vec<CellResult>,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub setup: Setup,
    pub rows: Vec<SummaryRow>,
    /// `(algorithm, index into rows)` of each algorithm's best step.
    pub best: Vec<(Algorithm, usize)>,
    pub files: Vec<PathBuf>,
}

fn write_instance(setup: &Setup, cfg: &ExperimentConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut put = |name: &str, res: Result<(), HarnessError>| -> Result<(), HarnessError> {
        res?;
        files.push(dir.join(name));
        Ok(())
    };
    put("config.toml", write_toml(&dir.join("config.toml"), cfg))?;
    put("game.toml", write_toml(&dir.join("game.toml"), &QuadraticGameRecord::from(&setup.spec)))?;
    put("graph.toml", write_toml(&dir.join("graph.toml"), &setup.graph))?;
    put("certificate.toml", write_toml(&dir.join("certificate.toml"), &setup.cert))?;
    if let Some(p) = &setup.params {
        put("params.toml", write_toml(&dir.join("params.toml"), p))?;
    }
    Ok(())
}

/// Runs every configured cell and writes traces, sidecars, the instance and
/// `summary.csv` into `dir`.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome, HarnessError> {
    cfg.validate()?;
    let setup = Setup::build(cfg)?;
    let cells = setup.cells(cfg)?;
    let results = setup.run_cells(&cells, cfg.k_max, cfg.stop_tol)?;
    let mut files = Vec::new();
    write_instance(&setup, cfg, dir, &mut files)?;
    for res in &results {
        let csv_path = dir.join(format!("{}_trace.csv", res.cell.label));
        write_trace_csv(&csv_path, &res.trace)?;
        files.push(csv_path);
        let mut columns: Vec<String> = TRACE_HEADER.iter().map(|s| s.to_string()).collect();
        if !res.trace.has_bound() {
            columns.pop();
        }
        let meta = TraceMeta {
            label: res.cell.label.clone(),
            algorithm: res.cell.algorithm,
            alpha: res.cell.step.alpha,
            lambda: res.cell.step.lambda,
            seed: cfg.seed,
            n: cfg.n,
            k_max: cfg.k_max,
            stop_tol: cfg.stop_tol,
            records: res.trace.records.len(),
            status: res.trace.status,
            d1_sq: res.trace.d1_sq(),
            bound_holds: res.row.bound_holds,
            columns,
        };
        let meta_path = dir.join(format!("{}_trace.toml", res.cell.label));
        write_toml(&meta_path, &meta)?;
        files.push(meta_path);
    }
    let rows: Vec<SummaryRow> = results.iter().map(|r| r.row.clone()).collect();
    let summary = dir.join("summary.csv");
    write_summary_csv(&summary, &rows, None)?;
    files.push(summary);
    Ok(RunOutcome { setup, results, files })
}

/// Step-size sweep: one row per `(algorithm, alpha)` in `sweep.csv`, with a
/// `best` column marking each algorithm's fastest step.
pub fn compare_experiment(cfg: &ExperimentConfig, grid: &SweepGrid, dir: &Path) -> Result<CompareOutcome, HarnessError> {
    cfg.validate()?;
    let setup = Setup::build(cfg)?;
    let cells = sweep_cells(&setup, cfg, grid)?;
    let rows: Vec<SummaryRow> =
        setup.run_cells(&cells, cfg.k_max, cfg.stop_tol)?.into_iter().map(|r| r.row).collect();
    let best = best_rows(&rows);
    let mut files = Vec::new();
    write_instance(&setup, cfg, dir, &mut files)?;
    let marks = (0..rows.len()).map(|i| best.iter().any(|&(_, j)| j == i).to_string()).collect();
    let sweep = dir.join("sweep.csv");
    write_summary_csv(&sweep, &rows, Some(("best", marks)))?;
    files.push(sweep);
    Ok(CompareOutcome { setup, rows, best, files })
}
