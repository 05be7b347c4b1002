//! Scalar inequalities the step-size certificate rests on. Both take plain
//! numbers so they can be fuzzed cheaply.

use serde::{Deserialize, Serialize};

use crate::algorithms::eta_of;
use crate::{Error, Result, Scalar};

/// Tolerance on `margin` below which an inequality counts as violated.
pub const MARGIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck<T> {
    pub holds: bool,
    pub lhs: T,
    pub rhs: T,
    /// `rhs − lhs`.
    pub margin: T,
}

impl<T: Scalar> InequalityCheck<T> {
    fn new(lhs: T, rhs: T) -> Self {
        let margin = rhs - lhs;
        Self { holds: margin >= -T::lit(MARGIN_TOL), lhs, rhs, margin }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Appendix2Outcome<T> {
    Checked(InequalityCheck<T>),
    /// `alpha` lies outside the region where the inequality is claimed.
    PreconditionUnmet,
}

impl<T: Scalar> Appendix2Outcome<T> {
    pub fn holds(&self) -> Option<bool> {
        match self {
            Appendix2Outcome::Checked(c) => Some(c.holds),
            Appendix2Outcome::PreconditionUnmet => None,
        }
    }
}

fn validate<T: Scalar>(mu: T, l: T, n: usize, alpha: T) -> Result<()> {
    let bad = |m: String| Err(Error::InadmissibleInput(m));
    if !(mu > T::zero() && mu.is_finite()) {
        return bad(format!("mu must be positive, got {mu}"));
    }
    if !(l > T::zero() && l.is_finite()) {
        return bad(format!("L must be positive, got {l}"));
    }
    if n == 0 {
        return bad("n must be at least 1".into());
    }
    if !(alpha >= T::zero() && alpha.is_finite()) {
        return bad(format!("alpha must be nonnegative, got {alpha}"));
    }
    Ok(())
}

/// Compares the two contraction ratios,
///
/// ```text
/// (1 − eta + mu·alpha/n) / (1 + eta·q)
///   ≤ (1 − eta − 2(L + 2nL²/mu)·alpha) / ((1 − eta)·sigma² + eta·(1 + q))
/// ```
///
/// which must hold for every `alpha ≤ g1`. A zero right-hand denominator
/// (`alpha = 0`, `sigma = 0`) makes the right side `+∞`.
pub fn check_appendix1<T: Scalar>(mu: T, l: T, n: usize, sigma: T, q: T, alpha: T) -> Result<InequalityCheck<T>> {
    validate(mu, l, n, alpha)?;
    if !(sigma >= T::zero() && sigma < T::one()) {
        return Err(Error::InadmissibleInput(format!("sigma must lie in [0, 1), got {sigma}")));
    }
    if !(q >= T::zero() && q <= T::lit(4.0)) {
        return Err(Error::InadmissibleInput(format!("q must lie in [0, 4], got {q}")));
    }
    let eta = eta_of(l, alpha)?;
    let nn = T::from_count(n);
    let two = T::lit(2.0);
    let lhs = (T::one() - eta + mu * alpha / nn) / (T::one() + eta * q);
    let num = T::one() - eta - two * (l + two * nn * l * l / mu) * alpha;
    let den = (T::one() - eta) * sigma * sigma + eta * (T::one() + q);
    let rhs = if den == T::zero() {
        if num >= T::zero() {
            T::infinity()
        } else {
            T::neg_infinity()
        }
    } else {
        num / den
    };
    Ok(InequalityCheck::new(lhs, rhs))
}

/// `a2 = (1 − eta)/2 − (L + 2nL²/mu)·alpha ≥ 1/8` for
/// `alpha ≤ min(mu/(4(L·mu + 2nL²)), sqrt(3)/(4L))`.
pub fn check_appendix2<T: Scalar>(mu: T, l: T, n: usize, alpha: T) -> Result<Appendix2Outcome<T>> {
    validate(mu, l, n, alpha)?;
    let nn = T::from_count(n);
    let (two, four) = (T::lit(2.0), T::lit(4.0));
    let region = (mu / (four * (l * mu + two * nn * l * l))).min(T::lit(3.0).sqrt() / (four * l));
    if alpha > region {
        return Ok(Appendix2Outcome::PreconditionUnmet);
    }
    let eta = eta_of(l, alpha)?;
    let a2 = (T::one() - eta) / two - (l + two * nn * l * l / mu) * alpha;
    Ok(Appendix2Outcome::Checked(InequalityCheck::new(T::lit(0.125), a2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::thresholds;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reference_case() {
        let c = check_appendix1(2.0, 2.0, 2, 0.0, 1.0, 0.005).unwrap();
        assert!(c.holds && c.margin > 0.0, "{c:?}");
        let Appendix2Outcome::Checked(c2) = check_appendix2(2.0, 2.0, 2, 0.025).unwrap() else {
            panic!("0.025 is inside the region");
        };
        let eta = (1.0 - 0.99f64.sqrt()) / 2.0;
        assert!((c2.rhs - ((1.0 - eta) / 2.0 - 0.25)).abs() < 1e-15);
        assert!((c2.rhs - 0.248747).abs() < 1e-6);
        assert!(c2.holds);
    }

    #[test]
    fn zero_step() {
        let c = check_appendix1(1.0, 3.0, 4, 0.5, 2.0, 0.0).unwrap();
        assert_eq!(c.lhs, 1.0);
        assert_eq!(c.rhs, 4.0);
        let c = check_appendix1(1.0, 3.0, 4, 0.0, 2.0, 0.0).unwrap();
        assert_eq!(c.rhs, f64::INFINITY);
        assert!(c.holds);
        let c2 = check_appendix2(1.0, 3.0, 4, 0.0).unwrap();
        assert_eq!(c2.holds(), Some(true));
        assert_eq!(c2, Appendix2Outcome::Checked(InequalityCheck { holds: true, lhs: 0.125, rhs: 0.5, margin: 0.375 }));
    }

    #[test]
    fn domain_and_region() {
        assert!(matches!(check_appendix1(1.0, 1.0, 1, 0.0, 1.0, 0.6), Err(Error::Domain(_))));
        assert!(check_appendix1(1.0, 1.0, 1, 1.0, 1.0, 0.1).is_err());
        assert!(check_appendix1(-1.0, 1.0, 1, 0.0, 1.0, 0.1).is_err());
        assert_eq!(check_appendix2(2.0, 2.0, 2, 0.03).unwrap(), Appendix2Outcome::PreconditionUnmet);
        assert_eq!(check_appendix2(2.0, 2.0, 2, 0.03).unwrap().holds(), None);
    }

    /// Outside the claimed region the inequality can fail, so the checker is
    /// not vacuous.
    #[test]
    fn appendix1_can_fail_beyond_g1() {
        let c = check_appendix1(1.0, 1.0, 2, 0.9, 1.0, 0.2).unwrap();
        assert!(!c.holds);
    }

    fn sample_tuple(rng: &mut ChaCha8Rng) -> (f64, f64, usize, f64, f64) {
        let mu = 10f64.powf(rng.gen_range(-3.0..2.0));
        let l = mu * 10f64.powf(rng.gen_range(0.0..3.0));
        let n = rng.gen_range(1..=200);
        let sigma = if rng.gen_bool(0.05) { 0.0 } else { rng.gen_range(0.0..1.0) };
        let q = if rng.gen_bool(0.05) { 4.0 } else { rng.gen_range(f64::MIN_POSITIVE..=4.0) };
        (mu, l, n, sigma, q)
    }

    #[test]
    fn appendix1_fuzz() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
        for _ in 0..10_000 {
            let (mu, l, n, sigma, q) = sample_tuple(&mut rng);
            let g1 = thresholds(mu, l, n, sigma, q).g1;
            let alpha = if rng.gen_bool(0.1) { g1 } else { g1 * rng.gen_range(f64::MIN_POSITIVE..=1.0) };
            let c = check_appendix1(mu, l, n, sigma, q, alpha).unwrap();
            assert!(c.holds, "counterexample mu={mu} L={l} n={n} sigma={sigma} q={q} alpha={alpha}: {c:?}");
        }
    }

    #[test]
    fn appendix2_fuzz() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA2);
        for _ in 0..10_000 {
            let (mu, l, n, _, _) = sample_tuple(&mut rng);
            let region = (mu / (4.0 * (l * mu + 2.0 * n as f64 * l * l))).min(3f64.sqrt() / (4.0 * l));
            let alpha = if rng.gen_bool(0.1) { region } else { region * rng.gen_range(0.0..=1.0) };
            match check_appendix2(mu, l, n, alpha).unwrap() {
                Appendix2Outcome::Checked(c) => {
                    assert!(c.holds, "counterexample mu={mu} L={l} n={n} alpha={alpha}: {c:?}")
                }
                Appendix2Outcome::PreconditionUnmet => panic!("alpha={alpha} sampled inside the region"),
            }
        }
    }
}
