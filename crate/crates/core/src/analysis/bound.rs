use serde::{Deserialize, Serialize};

use crate::algorithms::{theorem_bound, AdmParams, RunTrace};
use crate::{Error, Result, Scalar};

/// Relative slack allowed on the envelope for floating-point noise.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport<T> {
    pub holds: bool,
    /// Smallest `bound(k) / dist_sq(k+1)` over the trace; `+∞` when every
    /// checked distance is zero (or nothing was checked).
    pub worst_margin: T,
    /// The `k` attaining `worst_margin`.
    pub worst_k: Option<usize>,
}

/// Checks `dist_sq(k+1) ≤ bound(k)·(1 + 1e−9)` for consecutive recorded
/// iterates, with the envelope recomputed from `params`, `l` and `q`.
///
/// The trace must carry a bound column (an ADM run with tuned parameters).
pub fn verify_bound<T: Scalar>(
    trace: &RunTrace<T>,
    params: &AdmParams<T>,
    l: T,
    q: T,
    d1_sq: T,
) -> Result<BoundReport<T>> {
    if !trace.has_bound() {
        return Err(Error::MissingBound);
    }
    let slack = T::one() + T::lit(BOUND_SLACK);
    let mut report = BoundReport { holds: true, worst_margin: T::infinity(), worst_k: None };
    for pair in trace.records.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        let bound = theorem_bound(params, l, q, cur.k, d1_sq);
        let dist = next.dist_sq;
        if !(dist <= bound * slack) {
            report.holds = false;
        }
        let margin = if dist == T::zero() { T::infinity() } else { bound / dist };
        let margin = if margin.is_nan() { T::neg_infinity() } else { margin };
        if margin < report.worst_margin || (report.worst_k.is_none() && margin != T::infinity()) {
            report.worst_margin = margin;
            report.worst_k = Some(cur.k);
        }
    }
    Ok(report)
}
