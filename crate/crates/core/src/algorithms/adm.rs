use super::estimation::{check_shape, gradient_diag_raw, project_augmented, EstimationMatrix};
use super::tuning::StepSize;
use crate::game::GameInstance;
use crate::graph::{mix, MixingMatrix};
use crate::linalg::Matrix;
use crate::{Error, Result, Scalar};

/// Iterate `x^k` plus what the next step needs from the previous one: the
/// mixed matrix `x̂^{k−1}` and the gradient diagonal at it.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmState<T> {
    pub x_cur: EstimationMatrix<T>,
    pub xhat_prev: Matrix<T>,
    pub grad_hat_prev: Vec<T>,
    pub k: usize,
}

/// `x̂⁰ = W x⁰`, `x¹ = P(x̂⁰)`, caches at `x̂⁰`, `k = 1`.
///
/// The projection is a no-op whenever mixing keeps the diagonal feasible; it
/// guards the case where neighbours' estimates pull it outside.
pub fn adm_init<T: Scalar>(
    game: &GameInstance<T>,
    w: &MixingMatrix<T>,
    x0: &EstimationMatrix<T>,
) -> Result<AdmState<T>> {
    check_shape(game, x0)?;
    if w.n() != game.n() {
        return Err(Error::DimensionMismatch { expected: game.n(), got: w.n() });
    }
    let xhat0 = mix(w, x0)?;
    let grad_hat_prev = gradient_diag_raw(game, &xhat0);
    let x_cur = project_augmented(game, xhat0.clone())?;
    Ok(AdmState { x_cur, xhat_prev: xhat0, grad_hat_prev, k: 1 })
}

/// One ADM iteration:
///
/// ```text
/// x̂^k     = W x^k
/// x^{k+1} = P_Ωa( x̂^k − alpha·(F(x̂^k) + lambda·(F(x^k) − F(x̂^{k−1}))) )
/// ```
///
/// Only the diagonal of the pseudo-gradient estimation is nonzero, so the
/// off-diagonal entries of `x^{k+1}` are copied from `x̂^k`. Exactly `2n`
/// partial-gradient evaluations; `F(x̂^{k−1})` comes from the cache.
pub fn adm_step<T: Scalar>(
    game: &GameInstance<T>,
    w: &MixingMatrix<T>,
    state: AdmState<T>,
    step: StepSize<T>,
) -> Result<AdmState<T>> {
    let xhat = mix(w, &state.x_cur)?;
    let g_hat = gradient_diag_raw(game, &xhat);
    let g_cur = gradient_diag_raw(game, &state.x_cur);
    let mut next = xhat.clone();
    for (i, iv) in game.intervals().iter().enumerate() {
        let direction = g_hat[i] + step.lambda * (g_cur[i] - state.grad_hat_prev[i]);
        next[(i, i)] = iv.project(xhat[(i, i)] - step.alpha * direction);
    }
    Ok(AdmState { x_cur: finish(game, next)?, xhat_prev: xhat, grad_hat_prev: g_hat, k: state.k + 1 })
}

/// Distributed gradient play, `x^{k+1} = P_Ωa(W x^k − alpha·F(W x^k))`: ADM with
/// `lambda = 0`, one gradient evaluation per player.
pub fn ddp_step<T: Scalar>(
    game: &GameInstance<T>,
    w: &MixingMatrix<T>,
    state: AdmState<T>,
    alpha: T,
) -> Result<AdmState<T>> {
    let xhat = mix(w, &state.x_cur)?;
    let g_hat = gradient_diag_raw(game, &xhat);
    let mut next = xhat.clone();
    for (i, iv) in game.intervals().iter().enumerate() {
        next[(i, i)] = iv.project(xhat[(i, i)] - alpha * g_hat[i]);
    }
    Ok(AdmState { x_cur: finish(game, next)?, xhat_prev: xhat, grad_hat_prev: g_hat, k: state.k + 1 })
}

fn finish<T: Scalar>(game: &GameInstance<T>, next: Matrix<T>) -> Result<EstimationMatrix<T>> {
    if !next.all_finite() {
        return Err(Error::NonFinite("iterate"));
    }
    EstimationMatrix::new(game, next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{reference_equilibrium, ActionInterval, CountingOracle, GeneratorConfig, QuadraticGameSpec};
    use crate::graph::{generate_named, generate_tree, metropolis_weights, CommGraph, GraphKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn scalar_game() -> GameInstance<f64> {
        QuadraticGameSpec::new(vec![1.0], vec![0.0], Matrix::zeros(1, 1), vec![ActionInterval::unbounded()])
            .unwrap()
            .to_game()
            .unwrap()
    }

    fn random_setup(n: usize, seed: u64, interval: [f64; 2]) -> (QuadraticGameSpec<f64>, GameInstance<f64>, MixingMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = GeneratorConfig { interval, ..GeneratorConfig::default() };
        let spec: QuadraticGameSpec<f64> = crate::game::generate_quadratic_game(n, &mut rng, &cfg).unwrap();
        let game = spec.to_game().unwrap();
        let w = metropolis_weights(&generate_tree(n, &mut rng).unwrap()).unwrap();
        (spec, game, w)
    }

    #[test]
    fn init_averages_on_complete_graph() {
        let spec = QuadraticGameSpec::new(vec![1.0, 1.0], vec![0.0, 0.0], Matrix::zeros(2, 2), vec![ActionInterval::unbounded(); 2]).unwrap();
        let game = spec.to_game().unwrap();
        let w = metropolis_weights(&generate_named(GraphKind::Complete, 2).unwrap()).unwrap();
        let x0 = EstimationMatrix::new(&game, Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap()).unwrap();
        let s = adm_init(&game, &w, &x0).unwrap();
        assert_eq!(s.x_cur.as_slice(), &[2.0, 3.0, 2.0, 3.0]);
        assert_eq!(s.k, 1);
    }

    #[test]
    fn init_keeps_diagonal_feasible() {
        let (_, game, w) = random_setup(6, 1, [0.0, 0.1]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x = Matrix::from_fn(6, 6, |_, _| rng.gen_range(-5.0..5.0));
        for i in 0..6 {
            x[(i, i)] = rng.gen_range(0.0..0.1);
        }
        let s = adm_init(&game, &w, &EstimationMatrix::new(&game, x).unwrap()).unwrap();
        assert!(game.is_feasible(&s.x_cur.actions()));
    }

    #[test]
    fn scalar_recursion() {
        let game = scalar_game();
        let w = metropolis_weights(&CommGraph::new(1, []).unwrap()).unwrap();
        let x0 = EstimationMatrix::new(&game, Matrix::from_rows(&[vec![1.0]]).unwrap()).unwrap();
        let step = StepSize::new(0.1, 1.0).unwrap();
        let s1 = adm_init(&game, &w, &x0).unwrap();
        let s2 = adm_step(&game, &w, s1, step).unwrap();
        assert!((s2.x_cur[(0, 0)] - 0.9).abs() < 1e-15);
        let s3 = adm_step(&game, &w, s2, step).unwrap();
        assert!((s3.x_cur[(0, 0)] - 0.82).abs() < 1e-15);
    }

    #[test]
    fn ddp_scalar_geometric() {
        let game = scalar_game();
        let w = metropolis_weights(&CommGraph::new(1, []).unwrap()).unwrap();
        let x0 = EstimationMatrix::new(&game, Matrix::from_rows(&[vec![1.0]]).unwrap()).unwrap();
        let mut s = adm_init(&game, &w, &x0).unwrap();
        for k in 1..50 {
            s = ddp_step(&game, &w, s, 0.1).unwrap();
            assert!((s.x_cur[(0, 0)] - 0.9f64.powi(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn ddp_is_adm_without_extrapolation() {
        let (_, game, w) = random_setup(7, 3, [-1.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x0 = project_augmented(&game, Matrix::from_fn(7, 7, |_, _| rng.gen_range(-2.0..2.0))).unwrap();
        let mut a = adm_init(&game, &w, &x0).unwrap();
        let mut d = a.clone();
        for _ in 0..30 {
            a = adm_step(&game, &w, a, StepSize::new(0.05, 0.0).unwrap()).unwrap();
            d = ddp_step(&game, &w, d, 0.05).unwrap();
            let bits = |s: &AdmState<f64>| s.x_cur.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a), bits(&d));
            assert_eq!(a.grad_hat_prev, d.grad_hat_prev);
        }
    }

    #[test]
    fn interior_equilibrium_is_a_fixed_point() {
        for seed in 0..5 {
            let (spec, game, w) = random_setup(8, seed, [f64::NEG_INFINITY, f64::INFINITY]);
            let cert = reference_equilibrium(&spec, 1e-12).unwrap();
            let x0 = EstimationMatrix::consensus(&game, &cert.x_star).unwrap();
            let mut a = adm_init(&game, &w, &x0).unwrap();
            let mut d = a.clone();
            let step = StepSize::new(0.01, 1.0).unwrap();
            for _ in 0..20 {
                let prev_a = a.x_cur.clone();
                let prev_d = d.x_cur.clone();
                a = adm_step(&game, &w, a, step).unwrap();
                d = ddp_step(&game, &w, d, 0.01).unwrap();
                for (x, y) in a.x_cur.as_slice().iter().zip(prev_a.as_slice()) {
                    assert!((x - y).abs() <= 1e-14);
                }
                for (x, y) in d.x_cur.as_slice().iter().zip(prev_d.as_slice()) {
                    assert!((x - y).abs() <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn step_uses_exactly_two_evaluations_per_player() {
        let (_, game, w) = random_setup(9, 4, [-1.0, 1.0]);
        let counter = Arc::new(CountingOracle::new(game.oracle().clone()));
        let counted = game.with_oracle(counter.clone()).unwrap();
        let x0 = EstimationMatrix::consensus(&counted, &[0.0; 9]).unwrap();
        let mut s = adm_init(&counted, &w, &x0).unwrap();
        for _ in 0..5 {
            counter.reset();
            s = adm_step(&counted, &w, s, StepSize::new(0.01, 0.9).unwrap()).unwrap();
            assert_eq!(counter.calls(), 2 * 9);
        }
        counter.reset();
        ddp_step(&counted, &w, s, 0.01).unwrap();
        assert_eq!(counter.calls(), 9);
    }

    #[test]
    fn iterates_stay_feasible() {
        let (_, game, w) = random_setup(10, 6, [-0.05, 0.02]);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x0 = project_augmented(&game, Matrix::from_fn(10, 10, |_, _| rng.gen_range(-1.0..1.0))).unwrap();
        let mut s = adm_init(&game, &w, &x0).unwrap();
        for _ in 0..200 {
            s = adm_step(&game, &w, s, StepSize::new(0.02, 1.0).unwrap()).unwrap();
            assert!(game.is_feasible(&s.x_cur.actions()));
        }
    }

    #[test]
    fn dimension_mismatch() {
        let (_, game, _) = random_setup(3, 0, [-1.0, 1.0]);
        let w4 = metropolis_weights(&generate_named(GraphKind::Path, 4).unwrap()).unwrap();
        let x0 = EstimationMatrix::consensus(&game, &[0.0; 3]).unwrap();
        assert!(matches!(adm_init(&game, &w4, &x0), Err(Error::DimensionMismatch { .. })));
    }
}
