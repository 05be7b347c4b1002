use serde::{Deserialize, Serialize};

use crate::algorithms::RunTrace;
use crate::{Error, Result, Scalar};

/// Least-squares geometric rate of `dist_sq` over iterations `window.0..=window.1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit<T> {
    /// Per-iteration factor, `exp` of the fitted slope of `ln dist_sq`.
    pub rho: T,
    pub r2: T,
    pub window: (usize, usize),
}

/// Fits over the default window: drop the first 10% of the records, then stop
/// at the first record below `100·eps·dist_sq(first)` (floor noise) or at
/// the first exact zero.
pub fn fit_rate<T: Scalar>(trace: &RunTrace<T>) -> Result<RateFit<T>> {
    let records = &trace.records;
    let Some(first) = records.first() else {
        return Err(Error::WindowTooShort(0));
    };
    let floor = T::lit(100.0) * T::epsilon() * first.dist_sq;
    let skip = records.len() / 10;
    let tail = &records[skip..];
    let len = tail.iter().position(|r| r.dist_sq <= floor || r.dist_sq == T::zero()).unwrap_or(tail.len());
    if len == 0 {
        return Err(Error::WindowTooShort(0));
    }
    fit_rate_window(trace, tail[0].k, tail[len - 1].k)
}

/// Fits over records with `start ≤ k ≤ end`, truncated at the first zero.
pub fn fit_rate_window<T: Scalar>(trace: &RunTrace<T>, start: usize, end: usize) -> Result<RateFit<T>> {
    let points: Vec<(f64, f64)> = trace
        .records
        .iter()
        .filter(|r| r.k >= start && r.k <= end)
        .take_while(|r| r.dist_sq > T::zero())
        .map(|r| (r.k as f64, r.dist_sq.to_f64_lossy().ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::WindowTooShort(points.len()));
    }
    if points.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::NonFinite("dist_sq in rate window"));
    }
    let m = points.len() as f64;
    let kx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let ly = points.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &points {
        sxx += (x - kx) * (x - kx);
        sxy += (x - kx) * (y - ly);
        syy += (y - ly) * (y - ly);
    }
    let slope = sxy / sxx;
    // a flat log-sequence is fitted perfectly by slope zero
    let flat = syy <= 1e-24 * points.iter().map(|p| p.1 * p.1).sum::<f64>();
    let slope = if flat { 0.0 } else { slope };
    let r2 = if flat { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    Ok(RateFit {
        rho: T::lit(slope.exp()),
        r2: T::lit(r2),
        window: (points[0].0 as usize, points[points.len() - 1].0 as usize),
    })
}
