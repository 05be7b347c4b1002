//! Builds the seeded game, graph and starting point of an experiment and runs
//! algorithm cells on it.

use adm_core::{
    epsilon_of, fit_rate, generate_named, generate_quadratic_game, generate_tree, lazy_laplacian_weights,
    metropolis_weights, project_augmented, reference_equilibrium, run, tune_parameters, verify_bound,
    AdmParams64, Algorithm, CommGraph, EquilibriumCertificate64, EstimationMatrix64, GameInstance64, GraphKind,
    Matrix64, MixingMatrix64, QuadraticGameSpec64, RunConfig, RunStatus, RunTrace64, StepSize,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, StepSource, WeightRule};
use crate::HarnessError;

/// Solver tolerance of the reference equilibrium.
pub const CERT_TOL: f64 = 1e-13;

/// Everything a seed determines.
#[derive(Debug, Clone)]
pub struct Setup {
    pub spec: QuadraticGameSpec64,
    pub game: GameInstance64,
    pub graph: CommGraph,
    pub w: MixingMatrix64,
    pub cert: EquilibriumCertificate64,
    pub x0: EstimationMatrix64,
    /// Tuned ADM parameters; `None` when the tuner rejects the instance.
    pub params: Option<AdmParams64>,
    pub tune_error: Option<String>,
}

/// One `(algorithm, alpha)` combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub label: String,
    pub algorithm: Algorithm,
    pub step: StepSize<f64>,
    /// Set for theorem-tuned ADM cells, which then carry the bound column.
    pub params: Option<AdmParams64>,
}

/// One line of `summary.csv` / `sweep.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub alpha: f64,
    /// `None` when the tolerance was not reached within `k_max` (or the run
    /// diverged).
    pub iterations_to_tol: Option<usize>,
    pub fitted_rho: Option<f64>,
    pub epsilon: Option<f64>,
    pub bound_holds: Option<bool>,
    pub label: String,
    pub lambda: f64,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub trace: RunTrace64,
    pub row: SummaryRow,
}

impl Setup {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        let n = cfg.n;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let spec: QuadraticGameSpec64 =
            generate_quadratic_game(n, &mut rng, &cfg.game.generator())?.with_provenance(Some(cfg.seed), Some(cfg.game.delta));
        let graph = match cfg.graph.kind {
            GraphKind::Tree => generate_tree(n, &mut rng)?,
            kind => generate_named(kind, n)?,
        }
        .with_seed(Some(cfg.seed));
        let w: MixingMatrix64 = match cfg.graph.weights {
            WeightRule::Metropolis => metropolis_weights(&graph)?,
            WeightRule::LazyLaplacian { step } => lazy_laplacian_weights(&graph, step)?,
        };
        let game = spec.to_game()?;
        let cert = reference_equilibrium(&spec, CERT_TOL)?;
        let raw = Matrix64::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
        let x0 = project_augmented(&game, raw)?;
        let (params, tune_error) = match tune_parameters(game.mu(), game.l(), n, w.sigma(), w.norm_i_minus_w(), 1.0) {
            Ok(p) => (Some(p), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Ok(Self { spec, game, graph, w, cert, x0, params, tune_error })
    }

    /// Parameters for a theorem step with the given safety factor.
    pub fn tuned(&self, safety: f64) -> Result<AdmParams64, HarnessError> {
        let g = &self.game;
        Ok(tune_parameters(g.mu(), g.l(), g.n(), self.w.sigma(), self.w.norm_i_minus_w(), safety)?)
    }

    /// Expands the configured algorithms into cells, in configuration order.
    pub fn cells(&self, cfg: &ExperimentConfig) -> Result<Vec<Cell>, HarnessError> {
        let mut cells = Vec::new();
        for a in &cfg.algorithms {
            let label = a.label();
            if let StepSource::Theorem { safety } = a.step {
                let p = self.tuned(safety)?;
                cells.push(Cell { label, algorithm: a.name, step: p.step_size(), params: Some(p) });
                continue;
            }
            let lambda = match a.name {
                Algorithm::Adm => a.lambda.unwrap_or(1.0),
                Algorithm::Ddp => 0.0,
            };
            let alphas = a.step.alphas(self.game.l(), None);
            let many = alphas.len() > 1;
            for (i, alpha) in alphas.into_iter().enumerate() {
                let label = if many { format!("{label}_{i:02}") } else { label.clone() };
                cells.push(Cell { label, algorithm: a.name, step: StepSize::new(alpha, lambda)?, params: None });
            }
        }
        Ok(cells)
    }

    pub fn run_cell(&self, cell: &Cell, k_max: usize, stop_tol: f64) -> Result<CellResult, HarnessError> {
        let cfg = RunConfig { algorithm: cell.algorithm, step: cell.step, params: cell.params, k_max, stop_tol };
        let trace = run(&self.game, &self.w, &self.x0, &cfg, &self.cert)?;
        let row = self.summarize(cell, &trace);
        Ok(CellResult { cell: cell.clone(), trace, row })
    }

    /// Runs cells in parallel; results come back in input order.
    pub fn run_cells(&self, cells: &[Cell], k_max: usize, stop_tol: f64) -> Result<Vec<CellResult>, HarnessError> {
        cells.par_iter().map(|c| self.run_cell(c, k_max, stop_tol)).collect()
    }

    fn summarize(&self, cell: &Cell, trace: &RunTrace64) -> SummaryRow {
        let g = &self.game;
        let iterations_to_tol = match trace.status {
            RunStatus::Converged { k } => Some(k),
            _ => None,
        };
        let (epsilon, bound_holds) = match cell.algorithm {
            Algorithm::Ddp => (None, None),
            Algorithm::Adm => {
                let eps = match &cell.params {
                    Some(p) => Some(p.epsilon),
                    None => epsilon_of(g.mu(), g.l(), g.n(), self.w.q(), cell.step.alpha).ok(),
                };
                let holds = cell.params.as_ref().and_then(|p| {
                    let d1 = trace.d1_sq()?;
                    verify_bound(trace, p, g.l(), self.w.q(), d1).ok().map(|r| r.holds)
                });
                (eps, holds)
            }
        };
        let status = match trace.status {
            RunStatus::Converged { .. } => "converged",
            RunStatus::MaxIterations => "max_iterations",
            RunStatus::Diverged { .. } => "diverged",
        };
        SummaryRow {
            algorithm: cell.algorithm,
            alpha: cell.step.alpha,
            iterations_to_tol,
            fitted_rho: fit_rate(trace).ok().map(|f| f.rho),
            epsilon,
            bound_holds,
            label: cell.label.clone(),
            lambda: cell.step.lambda,
            status: status.to_string(),
        }
    }
}

/// Grid of a `compare` sweep; endpoints in units of `1/L` when `relative`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub relative: bool,
    /// Adds the theorem-tuned ADM step (with its bound column) to the sweep.
    pub include_theorem: bool,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self { lo: 1e-2, hi: 2.0, steps: 10, relative: true, include_theorem: false }
    }
}

/// Sweep cells for every algorithm named in the configuration. ADM grid cells
/// take the extrapolation weight of the first ADM entry with one (default 1).
pub fn sweep_cells(setup: &Setup, cfg: &ExperimentConfig, grid: &SweepGrid) -> Result<Vec<Cell>, HarnessError> {
    if !(grid.lo > 0.0 && grid.hi >= grid.lo && grid.hi.is_finite()) || grid.steps == 0 {
        return Err(HarnessError::Field {
            field: "grid".into(),
            message: format!("need 0 < lo <= hi and steps >= 1, got lo={}, hi={}, steps={}", grid.lo, grid.hi, grid.steps),
        });
    }
    let unit = if grid.relative { 1.0 / setup.game.l() } else { 1.0 };
    let alphas = crate::config::log_grid(grid.lo * unit, grid.hi * unit, grid.steps);
    let mut names: Vec<Algorithm> = Vec::new();
    for a in &cfg.algorithms {
        if !names.contains(&a.name) {
            names.push(a.name);
        }
    }
    let adm_lambda = cfg.algorithms.iter().filter(|a| a.name == Algorithm::Adm).find_map(|a| a.lambda).unwrap_or(1.0);
    let mut cells = Vec::new();
    for name in names {
        let lambda = if name == Algorithm::Adm { adm_lambda } else { 0.0 };
        for (i, &alpha) in alphas.iter().enumerate() {
            cells.push(Cell { label: format!("{name}_{i:02}"), algorithm: name, step: StepSize::new(alpha, lambda)?, params: None });
        }
        if name == Algorithm::Adm && grid.include_theorem {
            let p = setup.tuned(1.0)?;
            cells.push(Cell { label: "adm_theorem".into(), algorithm: name, step: p.step_size(), params: Some(p) });
        }
    }
    Ok(cells)
}

/// Index of the fastest row per algorithm: fewest iterations to tolerance,
/// ties to the smaller step. Algorithms with no converged row are absent.
pub fn best_rows(rows: &[SummaryRow]) -> Vec<(Algorithm, usize)> {
    let mut best: Vec<(Algorithm, usize)> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let Some(it) = r.iterations_to_tol else { continue };
        match best.iter_mut().find(|(a, _)| *a == r.algorithm) {
            None => best.push((r.algorithm, i)),
            Some((_, j)) => {
                let cur = &rows[*j];
                let cur_it = cur.iterations_to_tol.expect("best rows converged");
                if it < cur_it || (it == cur_it && r.alpha < cur.alpha) {
                    *j = i;
                }
            }
        }
    }
    best
}
