use crate::game::EquilibriumCertificate;
use crate::linalg::Matrix;
use crate::{Error, Result, Scalar};

/// `X = X_par + X_perp` with `X_par = 𝟙𝟙ᵀX/n`, the row of column means
/// repeated, and `X_perp` the disagreement.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusSplit<T> {
    pub par: Matrix<T>,
    pub perp: Matrix<T>,
}

pub fn consensus_split<T: Scalar>(x: &Matrix<T>) -> ConsensusSplit<T> {
    let (rows, cols) = (x.rows(), x.cols());
    let mut mean = vec![T::zero(); cols];
    for i in 0..rows {
        for (m, &v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    let count = T::from_count(rows.max(1));
    for m in &mut mean {
        *m /= count;
    }
    let par = Matrix::repeat_row(rows, &mean);
    let perp = Matrix::from_fn(rows, cols, |i, j| x[(i, j)] - mean[j]);
    ConsensusSplit { par, perp }
}

/// `Σ_ij (X_ij − x*_j)²`, the squared Frobenius distance to `𝟙(x*)ᵀ`.
pub fn distance_sq<T: Scalar>(x: &Matrix<T>, cert: &EquilibriumCertificate<T>) -> Result<T> {
    let n = cert.x_star.len();
    if x.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.cols() });
    }
    let mut acc = T::zero();
    for i in 0..x.rows() {
        for (&v, &s) in x.row(i).iter().zip(&cert.x_star) {
            let d = v - s;
            acc += d * d;
        }
    }
    Ok(acc)
}
