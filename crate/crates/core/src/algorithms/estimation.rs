use std::ops::Deref;

use crate::game::GameInstance;
use crate::linalg::Matrix;
use crate::{Error, Result, Scalar};

/// n×n matrix of local copies: row `i` is player `i`'s estimate of the joint
/// action and the diagonal entry `(i, i)` is player `i`'s own action.
///
/// Invariant: finite entries and a feasible diagonal (membership in the
/// augmented action set).
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationMatrix<T>(Matrix<T>);

impl<T: Scalar> EstimationMatrix<T> {
    pub fn new(game: &GameInstance<T>, x: Matrix<T>) -> Result<Self> {
        check_shape(game, &x)?;
        if !x.all_finite() {
            return Err(Error::NonFinite("estimation matrix"));
        }
        if let Some(i) = (0..game.n()).find(|&i| !game.intervals()[i].contains(x[(i, i)])) {
            return Err(Error::Infeasible(i));
        }
        Ok(Self(x))
    }

    /// Every player holds the same joint action `x`.
    pub fn consensus(game: &GameInstance<T>, x: &[T]) -> Result<Self> {
        Self::new(game, Matrix::repeat_row(game.n(), x))
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.0
    }

    /// The players' own actions.
    pub fn actions(&self) -> Vec<T> {
        self.0.diagonal()
    }
}

impl<T> Deref for EstimationMatrix<T> {
    type Target = Matrix<T>;

    fn deref(&self) -> &Matrix<T> {
        &self.0
    }
}

pub(crate) fn check_shape<T: Scalar>(game: &GameInstance<T>, x: &Matrix<T>) -> Result<()> {
    if x.rows() != game.n() || x.cols() != game.n() {
        return Err(Error::DimensionMismatch { expected: game.n(), got: x.rows().max(x.cols()) });
    }
    Ok(())
}

/// Diagonal of the pseudo-gradient estimation: entry `i` is `∇ᵢJᵢ` at row `i`.
pub fn gradient_diag<T: Scalar>(game: &GameInstance<T>, x: &Matrix<T>) -> Result<Vec<T>> {
    check_shape(game, x)?;
    if !x.all_finite() {
        return Err(Error::NonFinite("gradient_diag argument"));
    }
    Ok(gradient_diag_raw(game, x))
}

#[inline]
pub(crate) fn gradient_diag_raw<T: Scalar>(game: &GameInstance<T>, x: &Matrix<T>) -> Vec<T> {
    (0..game.n()).map(|i| game.partial_gradient_raw(i, x.row(i))).collect()
}

/// Projection onto the augmented action set: clamps the diagonal, leaves the
/// estimates of other players' actions untouched.
pub fn project_augmented<T: Scalar>(game: &GameInstance<T>, mut x: Matrix<T>) -> Result<EstimationMatrix<T>> {
    check_shape(game, &x)?;
    for (i, iv) in game.intervals().iter().enumerate() {
        x[(i, i)] = iv.project(x[(i, i)]);
    }
    EstimationMatrix::new(game, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{ActionInterval, QuadraticGameSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn game(c12: f64, c21: f64, iv: ActionInterval<f64>) -> GameInstance<f64> {
        let c = Matrix::from_rows(&[vec![0.0, c12], vec![c21, 0.0]]).unwrap();
        QuadraticGameSpec::new(vec![1.0, 1.0], vec![0.0, 0.0], c, vec![iv; 2]).unwrap().to_game().unwrap()
    }

    #[test]
    fn gradient_diag_on_consensus_is_pseudo_gradient() {
        let g = game(0.5, 0.5, ActionInterval::unbounded());
        let x = [2.0, 3.0];
        assert_eq!(gradient_diag(&g, &Matrix::repeat_row(2, &x)).unwrap(), g.pseudo_gradient(&x).unwrap());
    }

    #[test]
    fn gradient_diag_reads_rows() {
        let g = game(0.0, 0.0, ActionInterval::unbounded());
        let x = Matrix::from_rows(&[vec![1.0, 9.0], vec![9.0, 1.0]]).unwrap();
        assert_eq!(gradient_diag(&g, &x).unwrap(), vec![1.0, 1.0]);

        // c12 = 1, c21 = 0 is not strongly monotone, so build the oracle directly
        let spec = QuadraticGameSpec::new(
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap(),
            vec![ActionInterval::unbounded(); 2],
        )
        .unwrap();
        let g = GameInstance::new(
            std::sync::Arc::new(spec.oracle()),
            spec.intervals().to_vec(),
            0.5,
            vec![1.0, 1.0],
            vec![1.0, 0.0],
        )
        .unwrap();
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(gradient_diag(&g, &x).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn project_augmented_clamps_diagonal_only() {
        let g = game(0.0, 0.0, ActionInterval::new(0.0, 1.0).unwrap());
        let x = Matrix::from_rows(&[vec![2.0, 5.0], vec![-3.0, -1.0]]).unwrap();
        let p = project_augmented(&g, x).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 5.0, -3.0, 0.0]);

        let feasible = Matrix::from_rows(&[vec![0.5, 5.0], vec![-3.0, 1.0]]).unwrap();
        assert_eq!(project_augmented(&g, feasible.clone()).unwrap().matrix(), &feasible);
    }

    #[test]
    fn project_augmented_is_nearest_point() {
        let g = game(0.0, 0.0, ActionInterval::new(-0.5, 0.25).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = Matrix::from_fn(2, 2, |_, _| rng.gen_range(-3.0..3.0));
        let p = project_augmented(&g, x.clone()).unwrap();
        let d = p.sub(&x).unwrap().frobenius_norm();
        for _ in 0..1000 {
            let mut y = Matrix::from_fn(2, 2, |_, _| rng.gen_range(-3.0..3.0));
            for i in 0..2 {
                y[(i, i)] = rng.gen_range(-0.5..0.25);
            }
            assert!(d <= y.sub(&x).unwrap().frobenius_norm());
        }
    }

    #[test]
    fn estimation_matrix_rejects_infeasible_diagonal() {
        let g = game(0.0, 0.0, ActionInterval::new(0.0, 1.0).unwrap());
        let x = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(EstimationMatrix::new(&g, x), Err(Error::Infeasible(0)));
    }
}
