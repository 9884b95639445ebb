//! Sweep configuration and the `ε_n`, `λ_n` schedules.

use std::path::{Path, PathBuf};

use gtv_core::metrics::PowerRule;
use gtv_core::{GroundTruthModel, KernelProfile};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// How `λ_n` is tied to `n` and `ε_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum LambdaRule {
    /// `λ = c · ε · n^{-b}`, well below `ε`.
    Overfit { c: f64, b: f64 },
    /// `λ = c · n^{-a}` with `ε ≪ λ ≪ 1`.
    Consistent { c: f64, a: f64 },
    /// `λ` held fixed.
    Fixed { value: f64 },
    /// `λ = c · n^{b}`, growing without bound.
    Underfit { c: f64, b: f64 },
}

impl LambdaRule {
    pub fn tag(&self) -> &'static str {
        match self {
            LambdaRule::Overfit { .. } => "overfit",
            LambdaRule::Consistent { .. } => "consistent",
            LambdaRule::Fixed { .. } => "fixed",
            LambdaRule::Underfit { .. } => "underfit",
        }
    }

    pub fn lambda(&self, n: usize, eps: f64) -> f64 {
        let n = n as f64;
        match *self {
            LambdaRule::Overfit { c, b } => c * eps * n.powf(-b),
            LambdaRule::Consistent { c, a } => c * n.powf(-a),
            LambdaRule::Fixed { value } => value,
            LambdaRule::Underfit { c, b } => c * n.powf(b),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            LambdaRule::Overfit { c, b } | LambdaRule::Underfit { c, b } => c > 0.0 && b >= 0.0 && b.is_finite(),
            LambdaRule::Consistent { c, a } => c > 0.0 && a > 0.0 && a < 1.0,
            LambdaRule::Fixed { value } => value > 0.0,
        };
        if ok && self.lambda(2, 0.5).is_finite() {
            Ok(())
        } else {
            Err(CliError::config(format!("lambda rule {self:?} does not give a positive sequence")))
        }
    }
}

fn default_eps_rule() -> PowerRule {
    PowerRule::new(1.0, 1.0 / 3.0)
}

fn default_kernel() -> String {
    "indicator".into()
}

fn default_test_m() -> usize {
    10_000
}

fn default_mincut_max_n() -> usize {
    20_000
}

fn default_csv() -> PathBuf {
    PathBuf::from("sweep.csv")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Preset name (`quadrant`, `quadrant-asymmetric`, ...) or a model JSON path.
    pub model: String,
    pub n_list: Vec<usize>,
    #[serde(default = "default_eps_rule")]
    pub eps_rule: PowerRule,
    pub lambda_rules: Vec<LambdaRule>,
    /// Kernel in `shape[:scale=..][:amp=..]` form.
    #[serde(default = "default_kernel")]
    pub kernel: String,
    pub seeds: Vec<u64>,
    #[serde(default = "default_test_m")]
    pub test_m: usize,
    /// Largest `n` solved by min cut; larger runs use the primal–dual solver.
    #[serde(default = "default_mincut_max_n")]
    pub mincut_max_n: usize,
    /// Report path, relative to the output directory unless absolute.
    #[serde(default = "default_csv")]
    pub output_csv: PathBuf,
    /// Also write label and solution scatter plots for every run.
    #[serde(default)]
    pub scatter: bool,
}

impl SweepConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| CliError::io(path.as_ref(), e))?;
        let config: Self = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(CliError::config("n_list must hold positive sizes"));
        }
        if self.seeds.is_empty() {
            return Err(CliError::config("at least one seed is required"));
        }
        if self.lambda_rules.is_empty() {
            return Err(CliError::config("at least one lambda rule is required"));
        }
        if !(self.eps_rule.c > 0.0 && self.eps_rule.a >= 0.0 && self.eps_rule.a.is_finite()) {
            return Err(CliError::config("eps rule must give a positive sequence"));
        }
        if self.test_m < gtv_core::metrics::MIN_TEST_SAMPLES {
            return Err(CliError::config(format!("test_m must be at least {}", gtv_core::metrics::MIN_TEST_SAMPLES)));
        }
        for rule in &self.lambda_rules {
            rule.validate()?;
        }
        self.kernel()?;
        Ok(())
    }

    pub fn kernel(&self) -> Result<KernelProfile> {
        Ok(self.kernel.parse::<KernelProfile>()?)
    }

    pub fn load_model(&self) -> Result<GroundTruthModel> {
        load_model(&self.model)
    }

    /// Default Fig.-style sweep: the three regimes on the symmetric quadrant model.
    pub fn example() -> Self {
        Self {
            model: "quadrant".into(),
            n_list: vec![500, 2000, 8000],
            eps_rule: default_eps_rule(),
            lambda_rules: vec![
                LambdaRule::Overfit { c: 1e-3, b: 0.0 },
                LambdaRule::Consistent { c: 1.0, a: 0.25 },
                LambdaRule::Underfit { c: 1e3, b: 0.0 },
            ],
            kernel: default_kernel(),
            seeds: vec![0, 1, 2],
            test_m: default_test_m(),
            mincut_max_n: default_mincut_max_n(),
            output_csv: default_csv(),
            scatter: false,
        }
    }
}

/// A preset name or the path of a model JSON file.
pub fn load_model(source: &str) -> Result<GroundTruthModel> {
    let path = Path::new(source);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(GroundTruthModel::from_json(&text)?)
    } else {
        Ok(GroundTruthModel::preset(source)?)
    }
}
