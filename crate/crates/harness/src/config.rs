//! Experiment configuration, stored as TOML.

use std::path::{Path, PathBuf};

use adm_core::{Algorithm, GeneratorConfig, GraphKind};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "ADM_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Drives one ChaCha8 stream that draws, in order, the game, the graph
    /// (for random trees) and the initial estimation matrix.
    pub seed: u64,
    pub n: usize,
    #[serde(default)]
    pub graph: GraphConfig,
    #[serde(default)]
    pub game: GameConfig,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<AlgorithmConfig>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Runs stop once the Frobenius distance to the equilibrium is at most
    /// this; `inf` disables early stopping.
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub kind: GraphKind,
    #[serde(default)]
    pub weights: WeightRule,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self { kind: GraphKind::Tree, weights: WeightRule::Metropolis }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightRule {
    #[default]
    Metropolis,
    /// `W = I − step·Laplacian`; `step` defaults to `1/(1 + max degree)`.
    LazyLaplacian { step: Option<f64> },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameFamily {
    #[default]
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    #[serde(default)]
    pub family: GameFamily,
    pub delta: f64,
    pub c_range: [f64; 2],
    pub b_range: [f64; 2],
    pub interval: [f64; 2],
}

impl Default for GameConfig {
    fn default() -> Self {
        let g = GeneratorConfig::default();
        Self { family: GameFamily::Quadratic, delta: g.delta, c_range: g.c_range, b_range: g.b_range, interval: g.interval }
    }
}

impl GameConfig {
    pub fn generator(&self) -> GeneratorConfig {
        GeneratorConfig { delta: self.delta, c_range: self.c_range, b_range: self.b_range, interval: self.interval }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub name: Algorithm,
    /// File stem of the trace; defaults to the algorithm name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub step: StepSource,
    /// Extrapolation weight for non-theorem ADM steps (default 1); ignored
    /// for DDP and for theorem-tuned steps, which use `1/(1 + eps)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl AlgorithmConfig {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.name.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum StepSource {
    /// `safety · min(g1, …, g4)` from the tuner.
    Theorem {
        #[serde(default = "one")]
        safety: f64,
    },
    /// `steps` log-spaced values in `[lo, hi]`.
    Grid {
        lo: f64,
        hi: f64,
        steps: usize,
        #[serde(default)]
        scale: GridScale,
    },
    Fixed { alpha: f64 },
}

/// Units of grid endpoints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScale {
    #[default]
    Absolute,
    /// Endpoints are multiples of `1/L`.
    InverseL,
}

impl StepSource {
    /// Concrete step sizes for a game with aggregate Lipschitz constant `l`;
    /// `theorem` is the tuned step when the source asks for it.
    pub fn alphas(&self, l: f64, theorem: Option<f64>) -> Vec<f64> {
        match *self {
            StepSource::Theorem { .. } => theorem.into_iter().collect(),
            StepSource::Fixed { alpha } => vec![alpha],
            StepSource::Grid { lo, hi, steps, scale } => {
                let unit = match scale {
                    GridScale::Absolute => 1.0,
                    GridScale::InverseL => 1.0 / l,
                };
                log_grid(lo * unit, hi * unit, steps)
            }
        }
    }
}

/// `steps` points from `lo` to `hi`, equally spaced in `log10`.
pub fn log_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..steps)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == steps - 1 {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (steps - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_k_max() -> usize {
    200_000
}

fn default_stop_tol() -> f64 {
    1e-6
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_algorithms() -> Vec<AlgorithmConfig> {
    let grid = StepSource::Grid { lo: 1e-2, hi: 2.0, steps: 10, scale: GridScale::InverseL };
    vec![
        AlgorithmConfig { name: Algorithm::Adm, label: None, step: StepSource::Theorem { safety: 1.0 }, lambda: None },
        AlgorithmConfig { name: Algorithm::Adm, label: Some("adm_grid".into()), step: grid, lambda: Some(1.0) },
        AlgorithmConfig { name: Algorithm::Ddp, label: Some("ddp_grid".into()), step: grid, lambda: None },
    ]
}

impl Default for ExperimentConfig {
    /// Twenty players on a random tree, quadratic game.
    fn default() -> Self {
        Self {
            seed: 20,
            n: 20,
            graph: GraphConfig::default(),
            game: GameConfig::default(),
            algorithms: default_algorithms(),
            k_max: default_k_max(),
            stop_tol: default_stop_tol(),
            output_dir: default_output_dir(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(path.to_path_buf(), e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Field-level checks beyond what deserialization enforces.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |field: &str, msg: String| Err(HarnessError::Field { field: field.to_string(), message: msg });
        if self.n == 0 {
            return bad("n", "must be at least 1".into());
        }
        if self.graph.kind == GraphKind::Ring && self.n < 3 {
            return bad("graph.kind", "a ring needs at least 3 players".into());
        }
        if let WeightRule::LazyLaplacian { step: Some(s) } = self.graph.weights {
            if !(s > 0.0 && s.is_finite()) {
                return bad("graph.weights.step", format!("must be positive, got {s}"));
            }
        }
        if let Err(e) = self.game.generator().validate() {
            return bad("game", e.to_string());
        }
        if self.algorithms.is_empty() {
            return bad("algorithms", "list is empty".into());
        }
        let mut labels = std::collections::BTreeSet::new();
        for (i, a) in self.algorithms.iter().enumerate() {
            let field = |f: &str| format!("algorithms[{i}].{f}");
            if !labels.insert(a.label()) {
                return bad(&field("label"), format!("duplicate label `{}`", a.label()));
            }
            if a.label().is_empty() || !a.label().chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return bad(&field("label"), "use ASCII letters, digits, `_` or `-`".into());
            }
            match a.step {
                StepSource::Theorem { safety } => {
                    if a.name != Algorithm::Adm {
                        return bad(&field("step"), "theorem step sizes exist for adm only".into());
                    }
                    if !(safety > 0.0 && safety <= 1.0) {
                        return bad(&field("step.safety"), format!("must lie in (0, 1], got {safety}"));
                    }
                }
                StepSource::Grid { lo, hi, steps, .. } => {
                    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                        return bad(&field("step"), format!("need 0 < lo <= hi, got lo={lo}, hi={hi}"));
                    }
                    if steps == 0 {
                        return bad(&field("step.steps"), "must be at least 1".into());
                    }
                }
                StepSource::Fixed { alpha } => {
                    if !(alpha > 0.0 && alpha.is_finite()) {
                        return bad(&field("step.alpha"), format!("must be positive, got {alpha}"));
                    }
                }
            }
            if let Some(l) = a.lambda {
                if a.name == Algorithm::Ddp {
                    return bad(&field("lambda"), "ddp has no extrapolation weight".into());
                }
                if !(l >= 0.0 && l.is_finite()) {
                    return bad(&field("lambda"), format!("must be nonnegative, got {l}"));
                }
            }
        }
        if self.k_max == 0 {
            return bad("k_max", "must be at least 1".into());
        }
        if !(self.stop_tol >= 0.0) {
            return bad("stop_tol", format!("must be nonnegative, got {}", self.stop_tol));
        }
        Ok(())
    }

    /// `output_dir`, unless the environment overrides it.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }
}
