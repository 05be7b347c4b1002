use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::adm::{adm_init, adm_step, ddp_step};
use super::estimation::EstimationMatrix;
use super::tuning::{theorem_bound, AdmParams, StepSize};
use crate::analysis::{consensus_split, distance_sq};
use crate::game::{nash_residual, EquilibriumCertificate, GameInstance};
use crate::graph::MixingMatrix;
use crate::{Error, Result, Scalar};

/// Divergence threshold relative to the initial squared distance.
const DIVERGENCE_FACTOR: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Adm,
    Ddp,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Adm => "adm",
            Algorithm::Ddp => "ddp",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adm" => Ok(Algorithm::Adm),
            "ddp" => Ok(Algorithm::Ddp),
            other => Err(Error::InvalidRun(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T> {
    pub algorithm: Algorithm,
    pub step: StepSize<T>,
    /// Tuned parameters; when present and matching `step.alpha` the trace of
    /// an ADM run carries the rate envelope.
    pub params: Option<AdmParams<T>>,
    pub k_max: usize,
    /// Stop once `dist_sq ≤ stop_tol²`. Infinite or NaN disables early stopping.
    pub stop_tol: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord<T> {
    pub k: usize,
    /// `‖x^k − x*‖²` in the Frobenius norm, `x*` the consensus equilibrium.
    pub dist_sq: T,
    /// Natural-map residual of the players' own actions.
    pub residual: T,
    /// `‖x^k_⊥‖`, the disagreement part.
    pub perp: T,
    /// Envelope on `‖x^{k+1} − x*‖²`, ADM with tuned parameters only.
    pub bound: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Converged { k: usize },
    MaxIterations,
    Diverged { k: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<T> {
    pub algorithm: Algorithm,
    pub step: StepSize<T>,
    pub records: Vec<RunRecord<T>>,
    pub status: RunStatus,
}

impl<T: Scalar> RunTrace<T> {
    pub fn d1_sq(&self) -> Option<T> {
        self.records.first().map(|r| r.dist_sq)
    }

    /// First `k` with `dist_sq ≤ threshold`.
    pub fn iterations_to(&self, threshold: T) -> Option<usize> {
        self.records.iter().find(|r| r.dist_sq <= threshold).map(|r| r.k)
    }

    pub fn has_bound(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.bound.is_some())
    }

    pub fn last(&self) -> Option<&RunRecord<T>> {
        self.records.last()
    }
}

/// Iterates from `x0` and records one [`RunRecord`] per iterate `x^k`,
/// `k = 1, 2, …`, until `k_max` records, convergence or divergence
/// (non-finite iterate, or `dist_sq` above `10¹²` times its initial value).
pub fn run<T: Scalar>(
    game: &GameInstance<T>,
    w: &MixingMatrix<T>,
    x0: &EstimationMatrix<T>,
    cfg: &RunConfig<T>,
    cert: &EquilibriumCertificate<T>,
) -> Result<RunTrace<T>> {
    if cfg.k_max == 0 {
        return Err(Error::InvalidRun("k_max must be at least 1".into()));
    }
    let step = StepSize::new(cfg.step.alpha, cfg.step.lambda)?;
    if cfg.algorithm == Algorithm::Ddp && step.lambda != T::zero() {
        return Err(Error::InvalidRun("DDP takes no extrapolation weight".into()));
    }
    if cert.x_star.len() != game.n() {
        return Err(Error::DimensionMismatch { expected: game.n(), got: cert.x_star.len() });
    }
    let params = match (cfg.algorithm, &cfg.params) {
        (Algorithm::Adm, Some(p)) if p.alpha == step.alpha && p.lambda == step.lambda => Some(p),
        _ => None,
    };
    let q = w.q();
    let stop_sq = if cfg.stop_tol.is_finite() { Some(cfg.stop_tol * cfg.stop_tol) } else { None };

    let mut state = adm_init(game, w, x0)?;
    let mut records = Vec::with_capacity(cfg.k_max.min(1 << 16));
    let mut d1_sq = T::zero();
    let mut limit = T::infinity();
    let status = loop {
        let x = &state.x_cur;
        let dist_sq = distance_sq(x, cert)?;
        let residual = nash_residual(game, &x.actions())?;
        let perp = consensus_split(x).perp.frobenius_norm();
        if state.k == 1 {
            d1_sq = dist_sq;
            let floor = cert.tolerance * cert.tolerance;
            limit = T::lit(DIVERGENCE_FACTOR) * dist_sq.max(floor);
        }
        let bound = params.map(|p| theorem_bound(p, game.l(), q, state.k, d1_sq));
        records.push(RunRecord { k: state.k, dist_sq, residual, perp, bound });

        if !dist_sq.is_finite() || dist_sq > limit {
            break RunStatus::Diverged { k: state.k };
        }
        if stop_sq.is_some_and(|s| dist_sq <= s) {
            break RunStatus::Converged { k: state.k };
        }
        if records.len() >= cfg.k_max {
            break RunStatus::MaxIterations;
        }
        let k = state.k;
        let next = match cfg.algorithm {
            Algorithm::Adm => adm_step(game, w, state, step),
            Algorithm::Ddp => ddp_step(game, w, state, step.alpha),
        };
        state = match next {
            Ok(s) => s,
            Err(Error::NonFinite(_)) => break RunStatus::Diverged { k: k + 1 },
            Err(e) => return Err(e),
        };
    };
    Ok(RunTrace { algorithm: cfg.algorithm, step, records, status })
}
