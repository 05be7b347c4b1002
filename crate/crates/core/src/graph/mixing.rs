use super::CommGraph;
use crate::linalg::{symmetric_eigenvalues, Matrix};
use crate::{Error, Result, Scalar};

/// Symmetric, nonnegative, row-stochastic matrix with its cached spectrum.
///
/// `sigma` is the second largest singular value (0 for a single node) and
/// `norm_i_minus_w` the spectral norm of `I − W`. Complete graphs and the
/// two-node graph give `sigma = 0`; that value is accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix<T> {
    w: Matrix<T>,
    eigenvalues: Vec<T>,
    sigma: T,
    norm_i_minus_w: T,
}

impl<T: Scalar> MixingMatrix<T> {
    /// Validates symmetry, nonnegativity and unit row sums, then caches the
    /// spectral quantities.
    pub fn from_matrix(w: Matrix<T>) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::DimensionMismatch { expected: w.rows(), got: w.cols() });
        }
        if !w.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let tol = row_sum_tolerance::<T>();
        for i in 0..w.rows() {
            let row = w.row(i);
            if row.iter().any(|&v| v < T::zero() || !v.is_finite()) {
                return Err(Error::InvalidGraph(format!("row {i} has a negative or non-finite weight")));
            }
            let s = row.iter().fold(T::zero(), |acc, &v| acc + v);
            if (s - T::one()).abs() > tol {
                return Err(Error::InvalidGraph(format!("row {i} sums to {s}, not 1")));
            }
        }
        let eigenvalues = symmetric_eigenvalues(&w)?;
        let sigma = second_from_eigenvalues(&eigenvalues);
        let norm_i_minus_w = eigenvalues.iter().fold(T::zero(), |acc, &l| acc.max((T::one() - l).abs()));
        Ok(Self { w, eigenvalues, sigma, norm_i_minus_w })
    }

    pub fn n(&self) -> usize {
        self.w.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.w
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn norm_i_minus_w(&self) -> T {
        self.norm_i_minus_w
    }

    /// `‖I − W‖²`, the quantity the step-size formulas use.
    pub fn q(&self) -> T {
        self.norm_i_minus_w * self.norm_i_minus_w
    }

    /// Returns whether the support of `W` matches the graph (edges and the
    /// diagonal positive, everything else zero).
    pub fn matches_support(&self, g: &CommGraph) -> bool {
        let n = self.n();
        if g.n() != n {
            return false;
        }
        let mut adj = vec![false; n * n];
        for &(i, j) in g.edges() {
            adj[i * n + j] = true;
            adj[j * n + i] = true;
        }
        (0..n).all(|i| {
            (0..n).all(|j| {
                let positive = self.w[(i, j)] > T::zero();
                positive == (i == j || adj[i * n + j])
            })
        })
    }
}

fn row_sum_tolerance<T: Scalar>() -> T {
    T::lit(1e-12).max(T::lit(64.0) * T::epsilon())
}

fn second_from_eigenvalues<T: Scalar>(ev: &[T]) -> T {
    let mut mags: Vec<T> = ev.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    mags.get(1).copied().unwrap_or_else(T::zero)
}

/// Metropolis–Hastings weights `w_ij = 1/(1 + max(deg_i, deg_j))` on edges,
/// with the remaining mass on the diagonal.
pub fn metropolis_weights<T: Scalar>(g: &CommGraph) -> Result<MixingMatrix<T>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let deg = g.degrees();
    let mut w = Matrix::zeros(n, n);
    for &(i, j) in g.edges() {
        let v = T::one() / (T::one() + T::from_count(deg[i].max(deg[j])));
        w[(i, j)] = v;
        w[(j, i)] = v;
    }
    fill_diagonal(&mut w);
    MixingMatrix::from_matrix(w)
}

/// Lazy Laplacian weights `W = I − step·L`. `step` defaults to
/// `1/(1 + max degree)`; it must lie in `(0, 1/max degree)` so the diagonal
/// stays positive.
pub fn lazy_laplacian_weights<T: Scalar>(g: &CommGraph, step: Option<T>) -> Result<MixingMatrix<T>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let dmax = g.degrees().into_iter().max().unwrap_or(0);
    let step = step.unwrap_or_else(|| T::one() / T::from_count(1 + dmax));
    if !(step > T::zero()) || (dmax > 0 && step * T::from_count(dmax) >= T::one()) {
        return Err(Error::InvalidGraph(format!("laplacian step {step} outside (0, 1/{dmax})")));
    }
    let mut w = Matrix::zeros(n, n);
    for &(i, j) in g.edges() {
        w[(i, j)] = step;
        w[(j, i)] = step;
    }
    fill_diagonal(&mut w);
    MixingMatrix::from_matrix(w)
}

fn fill_diagonal<T: Scalar>(w: &mut Matrix<T>) {
    for i in 0..w.rows() {
        let off = (0..w.cols()).filter(|&j| j != i).fold(T::zero(), |acc, j| acc + w[(i, j)]);
        w[(i, i)] = T::one() - off;
    }
}

/// `W·X`; row `i` of the result is player `i`'s weighted average of its
/// neighbours' estimates.
pub fn mix<T: Scalar>(w: &MixingMatrix<T>, x: &Matrix<T>) -> Result<Matrix<T>> {
    w.matrix().matmul(x)
}

/// Second largest singular value of a symmetric matrix (second largest
/// eigenvalue magnitude); 0 for a 1×1 matrix.
pub fn second_singular_value<T: Scalar>(w: &Matrix<T>) -> Result<T> {
    if !w.is_symmetric_within(T::lit(64.0) * T::epsilon()) {
        return Err(Error::NotSymmetric);
    }
    Ok(second_from_eigenvalues(&symmetric_eigenvalues(w)?))
}
