//! Randomized invariant suite behind `adm check`.

use std::fmt;

use adm_core::{
    adm_init, adm_step, check_appendix1, check_appendix2, ddp_step, generate_named, generate_quadratic_game,
    generate_tree, gradient_diag, linalg, metropolis_weights, reference_equilibrium, thresholds, tune_parameters,
    Appendix2Outcome, EstimationMatrix64, GeneratorConfig, GraphKind, Matrix64, MixingMatrix64,
    QuadraticGameSpec64, StepSize,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Deliberate defects for exercising the suite itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Evaluates the first inequality far beyond its step-size region.
    Appendix1,
    /// Samples the second inequality outside its region.
    Appendix2,
    /// Uses half the true second singular value.
    Sigma,
    /// Starts the fixed-point test away from the equilibrium.
    FixedPoint,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "appendix1" => Ok(Fault::Appendix1),
            "appendix2" => Ok(Fault::Appendix2),
            "sigma" => Ok(Fault::Sigma),
            "fixed-point" => Ok(Fault::FixedPoint),
            _ => Err(format!("unknown fault `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// Randomized tuples per inequality; other checks scale with it.
    pub samples: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { samples: 10_000, seed: 0x5eed, fault: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub samples: usize,
    pub failures: usize,
    /// First failing input, as TOML.
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub results: Vec<CheckResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.failures == 0)
    }

    pub fn failed_checks(&self) -> usize {
        self.results.iter().filter(|r| r.failures > 0).count()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            let verdict = if r.failures == 0 { "pass" } else { "FAIL" };
            writeln!(f, "{verdict:4} {:<14} {} samples, {} failures", r.name, r.samples, r.failures)?;
        }
        let passed = self.results.len() - self.failed_checks();
        writeln!(f, "{passed} passed, {} failed", self.failed_checks())?;
        for r in self.results.iter().filter(|r| r.counterexample.is_some()) {
            writeln!(f, "\n[counterexample.{}]", r.name)?;
            write!(f, "{}", r.counterexample.as_deref().unwrap_or_default())?;
        }
        Ok(())
    }
}

struct Tally {
    name: &'static str,
    samples: usize,
    failures: usize,
    counterexample: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { name, samples: 0, failures: 0, counterexample: None }
    }

    fn record<S: Serialize>(&mut self, ok: bool, input: impl FnOnce() -> S) {
        self.samples += 1;
        if !ok {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(toml::to_string(&input()).unwrap_or_else(|e| format!("# unserializable: {e}\n")));
            }
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult { name: self.name, samples: self.samples, failures: self.failures, counterexample: self.counterexample }
    }
}

pub fn run_checks(opts: &CheckOptions) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let results = vec![
        appendix1(opts, &mut rng),
        appendix2(opts, &mut rng),
        tuner(opts, &mut rng),
        mixing(opts, &mut rng),
        fixed_point(opts, &mut rng),
        lipschitz(opts, &mut rng),
    ];
    CheckReport { results }
}

#[derive(Serialize)]
struct Tuple {
    mu: f64,
    l: f64,
    n: usize,
    sigma: f64,
    q: f64,
    alpha: f64,
    margin: Option<f64>,
}

fn sample_tuple(rng: &mut ChaCha8Rng) -> Tuple {
    let mu = 10f64.powf(rng.gen_range(-3.0..2.0));
    let l = mu * 10f64.powf(rng.gen_range(0.0..3.0));
    let n = rng.gen_range(1..=500);
    let sigma = if rng.gen_bool(0.05) { 0.0 } else { rng.gen_range(0.0..1.0) };
    let q = if rng.gen_bool(0.05) { 4.0 } else { 4.0 * (1.0 - rng.gen::<f64>()) };
    Tuple { mu, l, n, sigma, q, alpha: 0.0, margin: None }
}

fn appendix1(opts: &CheckOptions, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut t = Tally::new("appendix1");
    for _ in 0..opts.samples {
        let mut s = sample_tuple(rng);
        let g1 = thresholds(s.mu, s.l, s.n, s.sigma, s.q).g1;
        s.alpha = if rng.gen_bool(0.1) { g1 } else { g1 * (1.0 - rng.gen::<f64>()) };
        if opts.fault == Some(Fault::Appendix1) {
            s.alpha = (s.alpha * 1e3).min(0.5 / s.l);
        }
        let res = check_appendix1(s.mu, s.l, s.n, s.sigma, s.q, s.alpha);
        s.margin = res.as_ref().ok().map(|c| c.margin);
        t.record(matches!(res, Ok(c) if c.holds), || s);
    }
    t.finish()
}

fn appendix2(opts: &CheckOptions, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut t = Tally::new("appendix2");
    for _ in 0..opts.samples {
        let mut s = sample_tuple(rng);
        let nn = s.n as f64;
        let region = (s.mu / (4.0 * (s.l * s.mu + 2.0 * nn * s.l * s.l))).min(3f64.sqrt() / (4.0 * s.l));
        s.alpha = if rng.gen_bool(0.1) { region } else { region * rng.gen::<f64>() };
        if opts.fault == Some(Fault::Appendix2) {
            s.alpha = (s.alpha * 10.0).min(0.5 / s.l);
        }
        let res = check_appendix2(s.mu, s.l, s.n, s.alpha);
        s.margin = match &res {
            Ok(Appendix2Outcome::Checked(c)) => Some(c.margin),
            _ => None,
        };
        t.record(matches!(res, Ok(Appendix2Outcome::Checked(c)) if c.holds), || s);
    }
    t.finish()
}

fn tuner(opts: &CheckOptions, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut t = Tally::new("tuner");
    for _ in 0..(opts.samples / 10).max(10) {
        let mut s = sample_tuple(rng);
        let ok = match tune_parameters(s.mu, s.l, s.n, s.sigma, s.q.sqrt(), 1.0) {
            Ok(p) => {
                s.alpha = p.alpha;
                let lam = (p.lambda * (1.0 + p.epsilon) - 1.0).abs() <= 1e-12;
                let l2a2 = p.l * p.l * p.alpha * p.alpha;
                let eta = (l2a2 - p.eta * (1.0 - p.eta)).abs() <= 1e-12 * l2a2;
                lam && eta
            }
            Err(_) => false,
        };
        t.record(ok, || s);
    }
    t.finish()
}

#[derive(Serialize)]
struct MixingCase {
    kind: GraphKind,
    n: usize,
    edges: Vec<[usize; 2]>,
    sigma: f64,
    detail: String,
}

fn random_graph(rng: &mut ChaCha8Rng) -> adm_core::CommGraph {
    let n = rng.gen_range(1..=40);
    let kind = match rng.gen_range(0..4) {
        0 if n >= 3 => GraphKind::Ring,
        1 => GraphKind::Complete,
        2 => GraphKind::Path,
        _ => GraphKind::Tree,
    };
    match kind {
        GraphKind::Tree => generate_tree(n, rng).expect("n >= 1"),
        k => generate_named(k, n).expect("valid size"),
    }
}

fn mixing(opts: &CheckOptions, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut t = Tally::new("mixing");
    for _ in 0..(opts.samples / 1000).max(10) {
        let g = random_graph(rng);
        let n = g.n();
        let case = |detail: String, sigma: f64| MixingCase {
            kind: g.kind().unwrap_or(GraphKind::Tree),
            n,
            edges: g.edges().iter().map(|&(i, j)| [i, j]).collect(),
            sigma,
            detail,
        };
        let w: MixingMatrix64 = match metropolis_weights(&g) {
            Ok(w) => w,
            Err(e) => {
                t.record(false, || case(e.to_string(), f64::NAN));
                continue;
            }
        };
        let sigma = if opts.fault == Some(Fault::Sigma) { w.sigma() / 2.0 } else { w.sigma() };
        let m = w.matrix();
        let stochastic = (0..n).all(|i| (m.row(i).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let structural = m.is_symmetric() && stochastic && m.as_slice().iter().all(|&v| v >= 0.0) && w.matches_support(&g);
        t.record(structural && (n == 1 || w.sigma() < 1.0 - 1e-12), || case("structure".into(), sigma));
        for _ in 0..1000 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mean = x.iter().sum::<f64>() / n as f64;
            let dev: Vec<f64> = x.iter().map(|v| v - mean).collect();
            let wx = m.matvec(&x).expect("square");
            let wdev: Vec<f64> = wx.iter().map(|v| v - mean).collect();
            let lhs = linalg::norm(&wdev);
            let rhs = sigma * linalg::norm(&dev) * (1.0 + 1e-12);
            // rounding of the mean itself can exceed the relative slack when
            // sigma = 0, so allow an absolute floor at machine precision
            let ok = lhs <= rhs + 64.0 * f64::EPSILON * linalg::norm(&x);
            t.record(ok, || case(format!("contraction: |Wx - mean| = {lhs:e} > {rhs:e}"), sigma));
        }
    }
    t.finish()
}

#[derive(Serialize)]
struct GameCase {
    n: usize,
    seed: u64,
    detail: String,
}

fn interior_game(n: usize, seed: u64) -> QuadraticGameSpec64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = GeneratorConfig { interval: [f64::NEG_INFINITY, f64::INFINITY], ..GeneratorConfig::default() };
    generate_quadratic_game(n, &mut rng, &cfg).expect("valid generator")
}

fn fixed_point(opts: &CheckOptions, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut t = Tally::new("fixed_point");
    for _ in 0..(opts.samples / 1000).max(5) {
        let n = rng.gen_range(1..=25);
        let seed = rng.gen();
        let spec = interior_game(n, seed);
        let game = spec.to_game().expect("generated game is valid");
        let w: MixingMatrix64 = metropolis_weights(&generate_tree(n, rng).expect("n >= 1")).expect("tree is connected");
        let cert = reference_equilibrium(&spec, 1e-13).expect("interior equilibrium");
        let mut start = cert.x_star.clone();
        if opts.fault == Some(Fault::FixedPoint) {
            start[0] += 1e-3;
        }
        let x0 = EstimationMatrix64::consensus(&game, &start).expect("unbounded intervals");
        let alpha = 0.1 / game.l();
        let mut a = adm_init(&game, &w, &x0).expect("dimensions match");
        let mut d = a.clone();
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let (pa, pd) = (a.x_cur.clone(), d.x_cur.clone());
            a = adm_step(&game, &w, a, StepSize { alpha, lambda: 1.0 }).expect("finite");
            d = ddp_step(&game, &w, d, alpha).expect("finite");
            for (x, y) in a.x_cur.as_slice().iter().zip(pa.as_slice()).chain(d.x_cur.as_slice().iter().zip(pd.as_slice())) {
                worst = worst.max((x - y).abs());
            }
        }
        t.record(worst <= 1e-14, || GameCase { n, seed, detail: format!("largest entry change {worst:e}") });
    }
    t.finish()
}

/// Sampled Lipschitz ratio of the estimation mapping `X ↦ diag-gradient(X)`
/// against the aggregate constant.
fn lipschitz(opts: &CheckOptions, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut t = Tally::new("lipschitz");
    for _ in 0..(opts.samples / 1000).max(5) {
        let n = rng.gen_range(1..=25);
        let seed = rng.gen();
        let game = interior_game(n, seed).to_game().expect("generated game is valid");
        let l = game.l();
        for _ in 0..1000 {
            let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
            let x = Matrix64::from_fn(n, n, |_, _| scale * rng.gen_range(-1.0..1.0));
            let y = Matrix64::from_fn(n, n, |_, _| scale * rng.gen_range(-1.0..1.0));
            let fx = gradient_diag(&game, &x).expect("finite");
            let fy = gradient_diag(&game, &y).expect("finite");
            let num: f64 = fx.iter().zip(&fy).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let den = x.sub(&y).expect("same shape").frobenius_norm();
            let ratio = num / den;
            t.record(ratio <= l * (1.0 + 1e-9), || GameCase { n, seed, detail: format!("ratio {ratio:e} > L = {l:e}") });
        }
    }
    t.finish()
}
