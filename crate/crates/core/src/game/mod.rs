//! Games with scalar actions, their pseudo-gradients and certified constants.
//!
//! A [`GameInstance`] bundles a thread-safe gradient oracle with each player's
//! action interval and the constants the step-size theory consumes: the
//! restricted strong monotonicity modulus `mu`, the per-player Lipschitz
//! constants in the own action (`l_local`) and in the others' actions
//! (`l_cross`), their aggregate `l` and the condition number `gamma = l / mu`.
//!
//! Callers supplying their own oracle are responsible for the constants being
//! valid on all of ℝⁿ; the library cannot verify that for arbitrary code.

mod equilibrium;
mod quadratic;

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::linalg::norm;
use crate::{Error, Result, Scalar};

pub use equilibrium::{reference_equilibrium, EquilibriumCertificate};
pub use quadratic::{
    generate_quadratic_game, quadratic_constants, GeneratorConfig, QuadraticConstants,
    QuadraticGameRecord, QuadraticGameSpec, QuadraticOracle,
};

/// Closed interval with possibly infinite endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]", bound = "T: Scalar")]
pub struct ActionInterval<T> {
    lo: T,
    hi: T,
}

impl<T: Scalar> ActionInterval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == T::infinity() || hi == T::neg_infinity() {
            return Err(Error::InvalidInterval { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
        }
        Ok(Self { lo, hi })
    }

    pub fn unbounded() -> Self {
        Self { lo: T::neg_infinity(), hi: T::infinity() }
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn is_unbounded(&self) -> bool {
        self.lo == T::neg_infinity() && self.hi == T::infinity()
    }

    pub fn contains(&self, v: T) -> bool {
        v >= self.lo && v <= self.hi
    }

    /// Euclidean projection, i.e. `clamp(v, lo, hi)`.
    #[inline]
    pub fn project(&self, v: T) -> T {
        if v < self.lo {
            self.lo
        } else if v > self.hi {
            self.hi
        } else {
            v
        }
    }

    pub fn cast<U: Scalar>(&self) -> ActionInterval<U> {
        ActionInterval { lo: U::lit(self.lo.to_f64_lossy()), hi: U::lit(self.hi.to_f64_lossy()) }
    }
}

impl<T: Scalar> TryFrom<[f64; 2]> for ActionInterval<T> {
    type Error = Error;

    fn try_from([lo, hi]: [f64; 2]) -> Result<Self> {
        Self::new(T::lit(lo), T::lit(hi))
    }
}

impl<T: Scalar> From<ActionInterval<T>> for [f64; 2] {
    fn from(iv: ActionInterval<T>) -> Self {
        [iv.lo.to_f64_lossy(), iv.hi.to_f64_lossy()]
    }
}

impl<T: Scalar> fmt::Display for ActionInterval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

pub fn project_interval<T: Scalar>(iv: &ActionInterval<T>, v: T) -> T {
    iv.project(v)
}

/// Player-wise partial derivative of the cost, `(i, x) ↦ ∇ᵢJᵢ(x)`.
///
/// Implementations must be pure: the harness and tests call them from
/// several threads at once.
pub trait GradientOracle<T>: Send + Sync {
    fn n(&self) -> usize;

    /// `∇ᵢJᵢ(x)`; `i < n()` and `x.len() == n()` are guaranteed by the caller.
    fn partial_gradient(&self, i: usize, x: &[T]) -> T;
}

/// Wraps an oracle and counts calls to [`GradientOracle::partial_gradient`].
pub struct CountingOracle<T> {
    inner: Arc<dyn GradientOracle<T>>,
    calls: AtomicUsize,
}

impl<T> CountingOracle<T> {
    pub fn new(inner: Arc<dyn GradientOracle<T>>) -> Self {
        Self { inner, calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}

impl<T: Scalar> GradientOracle<T> for CountingOracle<T> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn partial_gradient(&self, i: usize, x: &[T]) -> T {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.partial_gradient(i, x)
    }
}

#[derive(Clone)]
pub struct GameInstance<T> {
    oracle: Arc<dyn GradientOracle<T>>,
    intervals: Vec<ActionInterval<T>>,
    mu: T,
    l_local: Vec<T>,
    l_cross: Vec<T>,
    l: T,
    gamma: T,
}

impl<T: Scalar> fmt::Debug for GameInstance<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameInstance")
            .field("n", &self.n())
            .field("mu", &self.mu)
            .field("l", &self.l)
            .field("gamma", &self.gamma)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> GameInstance<T> {
    pub fn new(
        oracle: Arc<dyn GradientOracle<T>>,
        intervals: Vec<ActionInterval<T>>,
        mu: T,
        l_local: Vec<T>,
        l_cross: Vec<T>,
    ) -> Result<Self> {
        let n = oracle.n();
        if n == 0 {
            return Err(Error::InvalidGame("game needs at least one player".into()));
        }
        for len in [intervals.len(), l_local.len(), l_cross.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        if !(mu > T::zero()) || !mu.is_finite() {
            return Err(Error::InvalidGame(format!("mu must be positive and finite, got {mu}")));
        }
        let l = aggregate_lipschitz(&l_local, &l_cross)?;
        Ok(Self { oracle, intervals, mu, l_local, l_cross, l, gamma: l / mu })
    }

    /// Same game with a different oracle (e.g. a [`CountingOracle`] wrapper).
    pub fn with_oracle(&self, oracle: Arc<dyn GradientOracle<T>>) -> Result<Self> {
        if oracle.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: oracle.n() });
        }
        Ok(Self { oracle, ..self.clone() })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[ActionInterval<T>] {
        &self.intervals
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn l_local(&self) -> &[T] {
        &self.l_local
    }

    pub fn l_cross(&self) -> &[T] {
        &self.l_cross
    }

    /// Lipschitz constant of the pseudo-gradient estimation mapping.
    pub fn l(&self) -> T {
        self.l
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn oracle(&self) -> &Arc<dyn GradientOracle<T>> {
        &self.oracle
    }

    pub fn partial_gradient(&self, i: usize, x: &[T]) -> Result<T> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange { index: i, n: self.n() });
        }
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("partial_gradient argument"));
        }
        Ok(self.oracle.partial_gradient(i, x))
    }

    /// Unchecked variant for the iteration loops.
    #[inline]
    pub(crate) fn partial_gradient_raw(&self, i: usize, x: &[T]) -> T {
        self.oracle.partial_gradient(i, x)
    }

    pub fn pseudo_gradient(&self, x: &[T]) -> Result<Vec<T>> {
        (0..self.n()).map(|i| self.partial_gradient(i, x)).collect()
    }

    pub fn project(&self, x: &[T]) -> Vec<T> {
        x.iter().zip(&self.intervals).map(|(&v, iv)| iv.project(v)).collect()
    }

    pub fn is_feasible(&self, x: &[T]) -> bool {
        x.len() == self.n() && x.iter().zip(&self.intervals).all(|(&v, iv)| iv.contains(v))
    }
}

pub fn partial_gradient<T: Scalar>(game: &GameInstance<T>, i: usize, x: &[T]) -> Result<T> {
    game.partial_gradient(i, x)
}

pub fn pseudo_gradient<T: Scalar>(game: &GameInstance<T>, x: &[T]) -> Result<Vec<T>> {
    game.pseudo_gradient(x)
}

/// `max_i sqrt(l_local[i]² + l_cross[i]²)`.
pub fn aggregate_lipschitz<T: Scalar>(l_local: &[T], l_cross: &[T]) -> Result<T> {
    if l_local.len() != l_cross.len() {
        return Err(Error::DimensionMismatch { expected: l_local.len(), got: l_cross.len() });
    }
    let mut best = T::zero();
    for (i, (&a, &b)) in l_local.iter().zip(l_cross).enumerate() {
        if a < T::zero() || b < T::zero() || a.is_nan() || b.is_nan() {
            return Err(Error::NegativeLipschitz(i));
        }
        best = best.max(a.hypot(b));
    }
    Ok(best)
}

/// Natural-map residual `‖x − P_Ω(x − F(x))‖`; zero exactly at equilibria.
pub fn nash_residual<T: Scalar>(game: &GameInstance<T>, x: &[T]) -> Result<T> {
    if x.len() != game.n() {
        return Err(Error::DimensionMismatch { expected: game.n(), got: x.len() });
    }
    if let Some(i) = x.iter().zip(game.intervals()).position(|(&v, iv)| !iv.contains(v)) {
        return Err(Error::Infeasible(i));
    }
    let f = game.pseudo_gradient(x)?;
    Ok(natural_residual(game.intervals(), x, &f))
}

pub(crate) fn natural_residual<T: Scalar>(intervals: &[ActionInterval<T>], x: &[T], f: &[T]) -> T {
    let diff: Vec<T> = x
        .iter()
        .zip(f)
        .zip(intervals)
        .map(|((&xi, &fi), iv)| xi - iv.project(xi - fi))
        .collect();
    norm(&diff)
}
