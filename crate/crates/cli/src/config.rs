//! Experiment configuration: one flat JSON document.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use shape_uq_core::geometry::{Materials, ParametricMap};
use shape_uq_core::ml_smolyak::WorkLevelOptions;
use shape_uq_core::models::{AnalyticSurrogate, CavityConfig, FemCavitySolver};

use crate::CliError;

pub const KNOWN_ESTIMATORS: [&str; 5] = [
    "mc",
    "mlmc",
    "smolyak",
    "ml-smolyak-interp",
    "ml-smolyak-quad",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: String,
    pub theta: f64,
    pub rho: f64,
    pub n_modes: usize,
    /// Truncation dimension of the sample space.
    pub dim: usize,
    pub levels: usize,
    pub seed: u64,
    pub estimators: Vec<String>,
    pub budgets: Vec<u32>,
    /// Realizations for RMSE estimates of the sampling estimators.
    pub repetitions: u32,
    pub mlmc_delta: f64,
    pub mlmc_c: f64,
    /// Optional JSON file with explicit per-level sample counts.
    pub samples_file: Option<String>,
    /// Random evaluation points for the interpolation error.
    pub test_points: usize,
    pub surrogate: SurrogateConfig,
    pub fem: FemConfig,
    pub work_levels: WorkLevelConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    pub c0: f64,
    pub gamma0: f64,
    pub bias0: f64,
    pub bias_ratio: f64,
    /// Synthetic level dimensions `dims_base^i`.
    pub dims_base: usize,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            c0: 2.0,
            gamma0: 0.4,
            bias0: 1.0,
            bias_ratio: 0.25,
            dims_base: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FemConfig {
    pub omega: f64,
    pub eps_re: f64,
    pub eps_im: f64,
}

impl Default for FemConfig {
    fn default() -> Self {
        Self {
            omega: 1.0,
            eps_re: 1.0,
            eps_im: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkLevelConfig {
    /// Bias decay exponent vs dimension; `null` selects the model default
    /// (`k = 1` for the 2D cavity QoI, `2/3` for the 3D-like surrogate).
    pub alpha: Option<f64>,
    pub kappa: Option<f64>,
    pub t0: f64,
    pub activation: f64,
    pub steps_per_level: u32,
    /// Scale on the map-derived per-dimension weights (fem model).
    pub beta_scale: f64,
}

impl Default for WorkLevelConfig {
    fn default() -> Self {
        Self {
            alpha: None,
            kappa: None,
            t0: 1.0,
            activation: 0.05,
            steps_per_level: 2,
            beta_scale: 1.0,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: "analytic".into(),
            theta: 0.25,
            rho: 3.0,
            n_modes: 3,
            dim: 0, // 0 means "n_modes"
            levels: 4,
            seed: 7,
            estimators: vec!["mlmc".into(), "ml-smolyak-quad".into()],
            budgets: vec![1, 2, 3, 4, 5, 6],
            repetitions: 6,
            mlmc_delta: 0.1,
            mlmc_c: 1.0,
            samples_file: None,
            test_points: 20,
            surrogate: SurrogateConfig::default(),
            fem: FemConfig::default(),
            work_levels: WorkLevelConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.model != "analytic" && self.model != "fem-cavity" {
            return Err(CliError::Config(format!(
                "model: expected \"analytic\" or \"fem-cavity\", got \"{}\"",
                self.model
            )));
        }
        if !(self.theta > 0.0) {
            return Err(CliError::Config("theta: must be positive".into()));
        }
        if !(self.rho > 1.0) {
            return Err(CliError::Config("rho: must be > 1".into()));
        }
        if self.n_modes == 0 {
            return Err(CliError::Config("n_modes: must be >= 1".into()));
        }
        if self.levels == 0 {
            return Err(CliError::Config("levels: must be >= 1".into()));
        }
        if self.budgets.is_empty() || self.budgets.contains(&0) {
            return Err(CliError::Config("budgets: need ranks >= 1".into()));
        }
        if self.repetitions < 2 {
            return Err(CliError::Config("repetitions: must be >= 2".into()));
        }
        for (i, e) in self.estimators.iter().enumerate() {
            if !KNOWN_ESTIMATORS.contains(&e.as_str()) {
                return Err(CliError::Config(format!(
                    "estimators[{i}]: unknown estimator \"{e}\""
                )));
            }
        }
        Ok(())
    }

    /// Truncation dimension, defaulting to the mode count.
    pub fn truncation_dim(&self) -> usize {
        if self.dim == 0 {
            self.n_modes
        } else {
            self.dim
        }
    }

    pub fn parametric_map(&self) -> ParametricMap {
        ParametricMap {
            theta: self.theta,
            rho: self.rho,
            n_modes: self.n_modes,
        }
    }

    pub fn materials(&self) -> Materials {
        Materials {
            eps: Complex64::new(self.fem.eps_re, self.fem.eps_im),
            ..Materials::default()
        }
    }

    pub fn build_surrogate(&self, levels: usize) -> Result<AnalyticSurrogate, CliError> {
        let dims = (1..=levels)
            .map(|i| self.surrogate.dims_base.pow(i as u32))
            .collect();
        AnalyticSurrogate::new(
            self.surrogate.c0,
            self.surrogate.gamma0,
            self.rho,
            self.n_modes,
            self.surrogate.bias0,
            self.surrogate.bias_ratio,
            dims,
        )
        .map_err(|e| CliError::Config(format!("surrogate: {e}")))
    }

    pub fn build_cavity(&self, levels: usize) -> Result<FemCavitySolver, CliError> {
        FemCavitySolver::new(CavityConfig {
            map: self.parametric_map(),
            materials: self.materials(),
            omega: self.fem.omega,
            levels,
            ..CavityConfig::default()
        })
        .map_err(|e| CliError::Config(format!("fem: {e}")))
    }

    /// Work-level options for the configured model. The surrogate mimics a
    /// 3D hierarchy (`alpha = 2/3`); the 2D cavity QoI decays with
    /// `alpha = k = 1`.
    pub fn work_level_options(&self) -> WorkLevelOptions {
        let default_alpha = if self.model == "analytic" { 2.0 / 3.0 } else { 1.0 };
        WorkLevelOptions {
            alpha: self.work_levels.alpha.unwrap_or(default_alpha),
            kappa: self.work_levels.kappa,
            t0: self.work_levels.t0,
            activation: self.work_levels.activation,
            steps_per_level: self.work_levels.steps_per_level,
        }
    }

    /// Per-dimension set weights for the configured model.
    pub fn smolyak_weights(&self, surrogate: Option<&AnalyticSurrogate>) -> Vec<f64> {
        match surrogate {
            Some(s) => s.smolyak_weights(),
            None => self.parametric_map().smolyak_weights(self.work_levels.beta_scale),
        }
    }

}
