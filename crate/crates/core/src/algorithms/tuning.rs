//! Step-size selection with a certified geometric rate.
//!
//! With `q = ‖I − W‖²` the step size is `alpha = safety · min(g1, g2, g3, g4)`
//! where
//!
//! ```text
//! g1 = n·mu·(1 − sigma²) / (4·(mu + 2nL)²·(1 + q))
//! g2 = n·(1 + q) / (2·mu)
//! g3 = mu·n·(1 + q) / (mu² + L²·(1 + q)²·n²)
//! g4 = mu / sqrt(4L²mu² + 16·(L·mu + 2nL²)²)
//! ```
//!
//! and then `eta = (1 − sqrt(1 − 4L²alpha²))/2`,
//! `eps = (2·mu·alpha/n − (1 + q)·2·eta) / (2 + q·2·eta)`, `lambda = 1/(1 + eps)`.
//! The iterates then obey
//! `‖x^{k+1} − x*‖² ≤ (8 + 8·q·eta)/(1 + eps)^{k−1} · ‖x¹ − x*‖²`.
//!
//! `eta` is evaluated as `2L²alpha²/(1 + sqrt(1 − 4L²alpha²))`, which is the
//! same quantity without the cancellation for small steps.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Step size and extrapolation weight consumed by a single ADM iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSize<T> {
    pub alpha: T,
    pub lambda: T,
}

impl<T: Scalar> StepSize<T> {
    pub fn new(alpha: T, lambda: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::InvalidRun(format!("step size must be positive and finite, got {alpha}")));
        }
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidRun(format!("extrapolation weight must be nonnegative, got {lambda}")));
        }
        Ok(Self { alpha, lambda })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds<T> {
    pub g1: T,
    pub g2: T,
    pub g3: T,
    pub g4: T,
}

impl<T: Scalar> Thresholds<T> {
    pub fn min(&self) -> T {
        self.g1.min(self.g2).min(self.g3).min(self.g4)
    }
}

/// Constants of the one-step potential inequality: the potential
/// `a1‖x_∥ − x*‖² + a2‖x_⊥‖²` after a step is bounded by
/// `b1‖x_∥ − x*‖² + b2‖x_⊥‖²` before it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropConstants<T> {
    pub a1: T,
    pub a2: T,
    pub b1: T,
    pub b2: T,
}

impl<T: Scalar> PropConstants<T> {
    pub fn ratio1(&self) -> T {
        self.a1 / self.b1
    }

    /// `a2/b2`; `+∞` when `b2 = 0` (no disagreement penalty at all).
    pub fn ratio2(&self) -> T {
        if self.b2 == T::zero() {
            T::infinity()
        } else {
            self.a2 / self.b2
        }
    }
}

/// Tuned parameters together with the inputs they were derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmParams<T> {
    pub mu: T,
    pub l: T,
    pub n: usize,
    pub sigma: T,
    /// `‖I − W‖²`.
    pub q: T,
    pub safety: T,
    pub alpha: T,
    pub lambda: T,
    pub eta: T,
    pub epsilon: T,
    pub thresholds: Thresholds<T>,
    pub prop: PropConstants<T>,
    /// Per-step potential contraction, `min(a1/b1, a2/b2) = 1 + epsilon`.
    pub c: T,
}

impl<T: Scalar> AdmParams<T> {
    pub fn step_size(&self) -> StepSize<T> {
        StepSize { alpha: self.alpha, lambda: self.lambda }
    }

    pub fn bound(&self, k: usize, d1_sq: T) -> T {
        theorem_bound(self, self.l, self.q, k, d1_sq)
    }

    pub fn condition_number(&self) -> T {
        self.l / self.mu
    }
}

/// `(1 − sqrt(1 − 4L²alpha²))/2`; domain error when `4L²alpha² > 1`.
pub fn eta_of<T: Scalar>(l: T, alpha: T) -> Result<T> {
    let z = T::lit(4.0) * l * l * alpha * alpha;
    if !(z <= T::one()) {
        return Err(Error::Domain(format!("4L²alpha² = {z} exceeds 1")));
    }
    let r = (T::one() - z).sqrt();
    Ok(T::lit(2.0) * l * l * alpha * alpha / (T::one() + r))
}

/// `eps(alpha)` from the rate certificate, for any admissible `alpha`.
pub fn epsilon_of<T: Scalar>(mu: T, l: T, n: usize, q: T, alpha: T) -> Result<T> {
    let eta = eta_of(l, alpha)?;
    let two = T::lit(2.0);
    let one_minus_r = two * eta;
    Ok((two * mu * alpha / T::from_count(n) - (T::one() + q) * one_minus_r) / (two + q * one_minus_r))
}

pub fn thresholds<T: Scalar>(mu: T, l: T, n: usize, sigma: T, q: T) -> Thresholds<T> {
    let nn = T::from_count(n);
    let (two, four, sixteen) = (T::lit(2.0), T::lit(4.0), T::lit(16.0));
    let one_q = T::one() + q;
    let g1 = nn * mu * (T::one() - sigma * sigma) / (four * (mu + two * nn * l).powi(2) * one_q);
    let g2 = nn * one_q / (two * mu);
    let g3 = mu * nn * one_q / (mu * mu + l * l * one_q * one_q * nn * nn);
    let g4 = mu / (four * l * l * mu * mu + sixteen * (l * mu + two * nn * l * l).powi(2)).sqrt();
    Thresholds { g1, g2, g3, g4 }
}

pub fn prop_constants<T: Scalar>(mu: T, l: T, n: usize, sigma: T, q: T, alpha: T, eta: T) -> PropConstants<T> {
    let nn = T::from_count(n);
    let two = T::lit(2.0);
    let one_eta = T::one() - eta;
    PropConstants {
        a1: one_eta / two + mu * alpha / (two * nn),
        a2: one_eta / two - (l + two * nn * l * l / mu) * alpha,
        b1: (T::one() + eta * q) / two,
        b2: (one_eta * sigma * sigma + eta * (T::one() + q)) / two,
    }
}

/// Chooses `alpha` and `lambda` from the problem constants and verifies every
/// inequality the rate certificate relies on.
///
/// `norm_i_minus_w` is the spectral norm `‖I − W‖` (it is squared here).
/// `safety ∈ (0, 1]` scales the step below the admissible maximum.
pub fn tune_parameters<T: Scalar>(
    mu: T,
    l: T,
    n: usize,
    sigma: T,
    norm_i_minus_w: T,
    safety: T,
) -> Result<AdmParams<T>> {
    let bad = |msg: String| Err(Error::InadmissibleInput(msg));
    if !(mu > T::zero()) || !mu.is_finite() {
        return bad(format!("mu must be positive, got {mu}"));
    }
    if !(l > T::zero()) || !l.is_finite() {
        return bad(format!("L must be positive, got {l}"));
    }
    if n == 0 {
        return bad("n must be at least 1".into());
    }
    if !(sigma >= T::zero() && sigma < T::one()) {
        return bad(format!("sigma must lie in [0, 1), got {sigma}"));
    }
    if !(norm_i_minus_w >= T::zero() && norm_i_minus_w <= T::lit(2.0)) {
        return bad(format!("‖I − W‖ must lie in [0, 2], got {norm_i_minus_w}"));
    }
    if !(safety > T::zero() && safety <= T::one()) {
        return bad(format!("safety factor must lie in (0, 1], got {safety}"));
    }

    let q = norm_i_minus_w * norm_i_minus_w;
    let g = thresholds(mu, l, n, sigma, q);
    let alpha = safety * g.min();
    let eta = eta_of(l, alpha)?;
    let epsilon = epsilon_of(mu, l, n, q, alpha)?;
    let lambda = T::one() / (T::one() + epsilon);
    let prop = prop_constants(mu, l, n, sigma, q, alpha, eta);
    let c = prop.ratio1().min(prop.ratio2());

    let params = AdmParams { mu, l, n, sigma, q, safety, alpha, lambda, eta, epsilon, thresholds: g, prop, c };
    check_invariants(&params)?;
    Ok(params)
}

fn check_invariants<T: Scalar>(p: &AdmParams<T>) -> Result<()> {
    let fail = |what: &str| Err(Error::TuningViolation(what.to_string()));
    let nn = T::from_count(p.n);
    let (two, four, eight) = (T::lit(2.0), T::lit(4.0), T::lit(8.0));
    let slack = T::one() + T::lit(1e-12);

    if !(p.alpha <= p.thresholds.min()) {
        return fail("alpha <= min(g1, g2, g3, g4)");
    }
    if !(p.eta > T::zero() && p.eta < T::one()) {
        return fail("0 < eta < 1");
    }
    if !(p.epsilon > T::zero()) {
        return fail("eps(alpha) > 0");
    }
    if !(p.c > T::one()) {
        return fail("c = min(a1/b1, a2/b2) > 1");
    }
    if !(p.prop.ratio1() <= p.prop.ratio2()) {
        return fail("a1/b1 <= a2/b2");
    }
    if !(p.prop.a2 >= T::one() / eight) {
        return fail("a2 >= 1/8");
    }
    if !(p.alpha <= p.mu / (four * (p.l * p.mu + two * nn * p.l * p.l)) * slack) {
        return fail("alpha <= mu/(4(L·mu + 2nL²))");
    }
    if !(p.alpha <= T::lit(3.0).sqrt() / (four * p.l) * slack) {
        return fail("alpha <= sqrt(3)/(4L)");
    }
    if !(p.alpha <= T::lit(7.0).sqrt() / (eight * p.l) * slack) {
        return fail("alpha <= sqrt(7)/(8L)");
    }
    let l2a2 = p.l * p.l * p.alpha * p.alpha;
    if !(p.c * p.eta * (T::one() - p.eta) * slack >= l2a2) {
        return fail("c·eta(1 − eta) >= L²alpha²");
    }
    Ok(())
}

/// Envelope `(8 + 4q − 4q·sqrt(1 − 4L²alpha²)) / (1 + eps)^{k−1} · d1_sq` on
/// `‖x^{k+1} − x*‖²`, where `q = ‖I − W‖²` and `d1_sq = ‖x¹ − x*‖²`.
pub fn theorem_bound<T: Scalar>(params: &AdmParams<T>, l: T, q: T, k: usize, d1_sq: T) -> T {
    let eta = eta_of(l, params.alpha).unwrap_or_else(|_| T::nan());
    let lead = T::lit(8.0) + T::lit(8.0) * q * eta;
    let exponent = k.saturating_sub(1) as f64;
    lead * d1_sq / (T::one() + params.epsilon).powf(T::lit(exponent))
}
