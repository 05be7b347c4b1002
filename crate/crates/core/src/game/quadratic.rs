//! Quadratic benchmark games `Jᵢ(x) = ½aᵢxᵢ² + bᵢxᵢ + (Σ_{j≠i} cᵢⱼxⱼ) xᵢ`.
//!
//! The pseudo-gradient is affine, `F(x) = Mx + b` with `Mᵢᵢ = aᵢ`, `Mᵢⱼ = cᵢⱼ`,
//! so all constants are available in closed form.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ActionInterval, GameInstance, GradientOracle};
use crate::linalg::{symmetric_eigenvalues, Matrix};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGameSpec<T> {
    a: Vec<T>,
    b: Vec<T>,
    c: Matrix<T>,
    intervals: Vec<ActionInterval<T>>,
    seed: Option<u64>,
    delta: Option<T>,
}

impl<T: Scalar> QuadraticGameSpec<T> {
    /// Validates shapes, `diag(C) = 0` and `aᵢ > 0`. Monotonicity is checked
    /// separately by [`quadratic_constants`].
    pub fn new(a: Vec<T>, b: Vec<T>, c: Matrix<T>, intervals: Vec<ActionInterval<T>>) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::InvalidGame("game needs at least one player".into()));
        }
        if b.len() != n || intervals.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len().min(intervals.len()) });
        }
        if c.rows() != n || c.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: c.rows() });
        }
        if let Some(i) = (0..n).find(|&i| c[(i, i)] != T::zero()) {
            return Err(Error::InvalidGame(format!("interaction matrix has nonzero diagonal at {i}")));
        }
        if let Some(i) = a.iter().position(|&v| !(v > T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidGame(format!("a[{i}] must be positive and finite")));
        }
        if b.iter().chain(c.as_slice()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("quadratic game coefficients"));
        }
        Ok(Self { a, b, c, intervals, seed: None, delta: None })
    }

    pub fn with_provenance(mut self, seed: Option<u64>, delta: Option<T>) -> Self {
        self.seed = seed;
        self.delta = delta;
        self
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn c(&self) -> &Matrix<T> {
        &self.c
    }

    pub fn intervals(&self) -> &[ActionInterval<T>] {
        &self.intervals
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn delta(&self) -> Option<T> {
        self.delta
    }

    pub fn with_intervals(mut self, intervals: Vec<ActionInterval<T>>) -> Result<Self> {
        if intervals.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: intervals.len() });
        }
        self.intervals = intervals;
        Ok(self)
    }

    /// Constant Jacobian `M` of the pseudo-gradient.
    pub fn jacobian(&self) -> Matrix<T> {
        let mut m = self.c.clone();
        for (i, &ai) in self.a.iter().enumerate() {
            m[(i, i)] = ai;
        }
        m
    }

    pub fn oracle(&self) -> QuadraticOracle<T> {
        QuadraticOracle { a: self.a.clone(), b: self.b.clone(), c: self.c.clone() }
    }

    /// Certifies the constants and wraps the spec as a [`GameInstance`].
    pub fn to_game(&self) -> Result<GameInstance<T>> {
        let k = quadratic_constants(self)?;
        GameInstance::new(Arc::new(self.oracle()), self.intervals.clone(), k.mu, k.l_local, k.l_cross)
    }

    pub fn cast<U: Scalar>(&self) -> QuadraticGameSpec<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::lit(x.to_f64_lossy())).collect::<Vec<U>>();
        QuadraticGameSpec {
            a: conv(&self.a),
            b: conv(&self.b),
            c: Matrix::from_fn(self.n(), self.n(), |i, j| U::lit(self.c[(i, j)].to_f64_lossy())),
            intervals: self.intervals.iter().map(ActionInterval::cast).collect(),
            seed: self.seed,
            delta: self.delta.map(|d| U::lit(d.to_f64_lossy())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadraticOracle<T> {
    a: Vec<T>,
    b: Vec<T>,
    c: Matrix<T>,
}

impl<T: Scalar> GradientOracle<T> for QuadraticOracle<T> {
    fn n(&self) -> usize {
        self.a.len()
    }

    #[inline]
    fn partial_gradient(&self, i: usize, x: &[T]) -> T {
        let coupling = self
            .c
            .row(i)
            .iter()
            .zip(x)
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(T::zero(), |acc, (_, (&cij, &xj))| acc + cij * xj);
        self.a[i] * x[i] + self.b[i] + coupling
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticConstants<T> {
    pub mu: T,
    pub l_local: Vec<T>,
    pub l_cross: Vec<T>,
}

/// `mu = λ_min((M + Mᵀ)/2)`, `l_local[i] = aᵢ`, `l_cross[i] = ‖row i of C‖`.
///
/// Rejects games whose symmetric Jacobian part is not positive definite
/// (eigenvalues within a few hundred ulps of zero count as zero).
pub fn quadratic_constants<T: Scalar>(spec: &QuadraticGameSpec<T>) -> Result<QuadraticConstants<T>> {
    let n = spec.n();
    let m = spec.jacobian();
    let half = T::lit(0.5);
    let sym = Matrix::from_fn(n, n, |i, j| half * (m[(i, j)] + m[(j, i)]));
    let ev = symmetric_eigenvalues(&sym)?;
    let lambda_min = ev[0];
    let floor = T::lit(1e3) * T::epsilon() * sym.frobenius_norm();
    if !(lambda_min > floor) {
        return Err(Error::NotStronglyMonotone { lambda_min: lambda_min.to_f64_lossy() });
    }
    let l_cross = (0..n).map(|i| crate::linalg::norm(spec.c().row(i))).collect();
    Ok(QuadraticConstants { mu: lambda_min, l_local: spec.a().to_vec(), l_cross })
}

/// Sampling ranges for [`generate_quadratic_game`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Diagonal-dominance margin; a lower bound on `mu`.
    pub delta: f64,
    pub c_range: [f64; 2],
    pub b_range: [f64; 2],
    /// Action interval shared by all players.
    pub interval: [f64; 2],
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self { delta: 0.5, c_range: [-1.0, 1.0], b_range: [-1.0, 1.0], interval: [-1.0, 1.0] }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidGenerator(format!("delta must be positive, got {}", self.delta)));
        }
        for (name, [lo, hi]) in [("c_range", self.c_range), ("b_range", self.b_range)] {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::InvalidGenerator(format!("{name} [{lo}, {hi}] is not a finite range")));
            }
        }
        ActionInterval::<f64>::try_from(self.interval)
            .map_err(|e| Error::InvalidGenerator(format!("interval: {e}")))?;
        Ok(())
    }
}

/// Draws `cᵢⱼ` (row-major, off-diagonal) then `bᵢ` uniformly, and sets
/// `aᵢ = Σⱼ (|cᵢⱼ| + |cⱼᵢ|)/2 + delta`, which makes the symmetric Jacobian part
/// strictly diagonally dominant with margin `delta`, hence `mu ≥ delta`.
pub fn generate_quadratic_game<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    cfg: &GeneratorConfig,
) -> Result<QuadraticGameSpec<T>> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::InvalidGenerator("n must be at least 1".into()));
    }
    let [clo, chi] = cfg.c_range;
    let [blo, bhi] = cfg.b_range;
    let mut c = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                c[i * n + j] = rng.gen_range(clo..=chi);
            }
        }
    }
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(blo..=bhi)).collect();
    let a: Vec<f64> = (0..n)
        .map(|i| {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| (c[i * n + j].abs() + c[j * n + i].abs()) / 2.0).sum();
            off + cfg.delta
        })
        .collect();
    let iv = ActionInterval::<T>::try_from(cfg.interval)?;
    let spec = QuadraticGameSpec::new(
        a.into_iter().map(T::lit).collect(),
        b.into_iter().map(T::lit).collect(),
        Matrix::from_fn(n, n, |i, j| T::lit(c[i * n + j])),
        vec![iv; n],
    )?;
    Ok(spec.with_provenance(None, Some(T::lit(cfg.delta))))
}

/// Structured-text form of a quadratic game. `c` holds the nonzero
/// interaction coefficients as zero-based `[i, j, value]` triplets in
/// row-major order; intervals are `[lo, hi]` pairs (`inf`/`-inf` allowed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticGameRecord {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<(usize, usize, f64)>,
    pub intervals: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl<T: Scalar> From<&QuadraticGameSpec<T>> for QuadraticGameRecord {
    fn from(spec: &QuadraticGameSpec<T>) -> Self {
        let n = spec.n();
        let c = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| spec.c[(i, j)] != T::zero())
            .map(|(i, j)| (i, j, spec.c[(i, j)].to_f64_lossy()))
            .collect();
        Self {
            n,
            a: spec.a.iter().map(|v| v.to_f64_lossy()).collect(),
            b: spec.b.iter().map(|v| v.to_f64_lossy()).collect(),
            c,
            intervals: spec.intervals.iter().map(|&iv| iv.into()).collect(),
            seed: spec.seed,
            delta: spec.delta.map(|d| d.to_f64_lossy()),
        }
    }
}

impl<T: Scalar> TryFrom<QuadraticGameRecord> for QuadraticGameSpec<T> {
    type Error = Error;

    fn try_from(rec: QuadraticGameRecord) -> Result<Self> {
        let n = rec.n;
        if rec.a.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: rec.a.len() });
        }
        let mut c = Matrix::zeros(n, n);
        for &(i, j, v) in &rec.c {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), n });
            }
            c[(i, j)] = T::lit(v);
        }
        let intervals = rec
            .intervals
            .iter()
            .map(|&pair| ActionInterval::try_from(pair))
            .collect::<Result<Vec<_>>>()?;
        let spec = QuadraticGameSpec::new(
            rec.a.into_iter().map(T::lit).collect(),
            rec.b.into_iter().map(T::lit).collect(),
            c,
            intervals,
        )?;
        Ok(spec.with_provenance(rec.seed, rec.delta.map(T::lit)))
    }
}
