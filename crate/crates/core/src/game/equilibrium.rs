use serde::{Deserialize, Serialize};

use super::{natural_residual, quadratic_constants, QuadraticGameSpec};
use crate::linalg::{solve, symmetric_eigenvalues, Matrix};
use crate::{Error, Result, Scalar};

const MAX_ITERATIONS: usize = 10_000_000;

/// Equilibrium computed by [`reference_equilibrium`], with the natural-map
/// residual achieved and the tolerance that was requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCertificate<T> {
    pub x_star: Vec<T>,
    pub residual: T,
    pub tolerance: T,
}

/// Centralized equilibrium oracle for the quadratic family.
///
/// Unconstrained games are solved directly from `Mx = −b` (with one step of
/// iterative refinement). Otherwise projected gradient
/// `x ← P_Ω(x − τF(x))` runs with `τ = mu / ‖M‖²` until the natural-map
/// residual drops to `tol`. `‖M‖` is the spectral norm of the Jacobian, the
/// Lipschitz constant of `F` itself, so the iteration contracts by
/// `sqrt(1 − mu²/‖M‖²)` per step.
pub fn reference_equilibrium<T: Scalar>(spec: &QuadraticGameSpec<T>, tol: T) -> Result<EquilibriumCertificate<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidGame(format!("tolerance must be positive, got {tol}")));
    }
    let consts = quadratic_constants(spec)?;
    let m = spec.jacobian();
    let b = spec.b();
    let intervals = spec.intervals();
    let eval = |x: &[T]| -> Vec<T> {
        m.matvec(x).expect("square jacobian").iter().zip(b).map(|(&mx, &bi)| mx + bi).collect()
    };

    if intervals.iter().all(|iv| iv.is_unbounded()) {
        let neg_b: Vec<T> = b.iter().map(|&v| -v).collect();
        let mut x = solve(&m, &neg_b)?;
        let r = eval(&x);
        let dx = solve(&m, &r)?;
        x.iter_mut().zip(&dx).for_each(|(xi, &d)| *xi -= d);
        let residual = natural_residual(intervals, &x, &eval(&x));
        if residual > tol {
            return Err(Error::NoConvergence { iterations: 0, residual: residual.to_f64_lossy() });
        }
        return Ok(EquilibriumCertificate { x_star: x, residual, tolerance: tol });
    }

    let lf = lipschitz_of_affine(&m)?;
    let tau = consts.mu / (lf * lf);
    let mut x: Vec<T> = intervals.iter().map(|iv| iv.project(T::zero())).collect();
    let mut f = eval(&x);
    for it in 0..MAX_ITERATIONS {
        let residual = natural_residual(intervals, &x, &f);
        if residual <= tol {
            return Ok(EquilibriumCertificate { x_star: x, residual, tolerance: tol });
        }
        if !residual.is_finite() {
            return Err(Error::NoConvergence { iterations: it, residual: residual.to_f64_lossy() });
        }
        for ((xi, &fi), iv) in x.iter_mut().zip(&f).zip(intervals) {
            *xi = iv.project(*xi - tau * fi);
        }
        f = eval(&x);
    }
    let residual = natural_residual(intervals, &x, &f);
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS, residual: residual.to_f64_lossy() })
}

fn lipschitz_of_affine<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    let gram = m.transpose().matmul(m)?;
    let top = symmetric_eigenvalues(&gram)?.last().copied().unwrap_or_else(T::zero);
    Ok(top.max(T::zero()).sqrt())
}
