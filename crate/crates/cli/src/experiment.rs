//! The error-versus-work experiment runner: for each configured estimator
//! and budget rank it produces one `estimator,rho,budget_rank,work,error`
//! row, with all errors measured against a closed-form or overkill reference
//! and all randomness derived from the single seed.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use shape_uq_core::ml_smolyak::{build_work_levels, ml_interpolate, ml_quadrature};
use shape_uq_core::mlmc::{allocate_samples, mc_estimate, mlmc_rmse, mlmc_work, RandomStream};
use shape_uq_core::models::{AnalyticSurrogate, FemCavitySolver, LevelSolver};
use shape_uq_core::oracle;
use shape_uq_core::UqError;

use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, CsvDoc};
use crate::CliError;

/// Stream tags keeping estimator sample blocks disjoint.
const TAG_MC: u64 = 1 << 32;
const TAG_MLMC: u64 = 2 << 32;
const TAG_TEST_POINTS: u64 = 3 << 32;

pub enum Model {
    Analytic(AnalyticSurrogate),
    Fem(FemCavitySolver),
}

/// A model together with its truth machinery: the level hierarchy used by
/// the estimators, a deeper solver for overkill and interpolation truths,
/// and the reference expectation.
pub struct Bench {
    pub model: Model,
    overkill: Model,
    pub reference: Complex64,
    pub weights: Vec<f64>,
    pub dims: Vec<usize>,
}

fn model_dims(model: &Model) -> Vec<usize> {
    match model {
        Model::Analytic(s) => (1..=s.num_levels())
            .map(|i| LevelSolver::<Complex64>::dim(s, i))
            .collect(),
        Model::Fem(s) => (1..=LevelSolver::<Complex64>::num_levels(s))
            .map(|i| LevelSolver::<Complex64>::dim(s, i))
            .collect(),
    }
}

fn eval_level(model: &Model, level: usize, y: &[f64]) -> Result<Complex64, UqError> {
    match model {
        Model::Analytic(s) => s.evaluate(level, y),
        Model::Fem(s) => LevelSolver::<Complex64>::evaluate(s, level, y),
    }
}

impl Bench {
    pub fn prepare(config: &ExperimentConfig, cache_dir: &Path) -> Result<Self, CliError> {
        let (model, overkill) = match config.model.as_str() {
            "analytic" => (
                Model::Analytic(config.build_surrogate(config.levels)?),
                Model::Analytic(config.build_surrogate(config.levels + 1)?),
            ),
            _ => (
                Model::Fem(config.build_cavity(config.levels)?),
                Model::Fem(config.build_cavity(config.levels + 1)?),
            ),
        };
        let weights = match &model {
            Model::Analytic(s) => config.smolyak_weights(Some(s)),
            Model::Fem(_) => config.smolyak_weights(None),
        };
        let dims = model_dims(&model);
        let reference = Self::reference(config, &overkill, &weights, cache_dir)?;
        Ok(Self {
            model,
            overkill,
            reference,
            weights,
            dims,
        })
    }

    /// Closed form when available (analytic model with few modes), otherwise
    /// a disk-cached overkill multilevel Smolyak run one level deeper with
    /// enlarged sets.
    fn reference(
        config: &ExperimentConfig,
        overkill: &Model,
        weights: &[f64],
        cache_dir: &Path,
    ) -> Result<Complex64, CliError> {
        if let Model::Analytic(deep) = overkill {
            if config.n_modes <= 4 {
                let re = deep
                    .closed_form_expectation()
                    .map_err(|e| CliError::Config(format!("surrogate: {e}")))?;
                return Ok(Complex64::new(re, 0.0));
            }
        }
        let opts = config.work_level_options();
        let deep_dims = model_dims(overkill);
        let deep_levels = deep_dims.len();
        let rank = opts.steps_per_level * deep_levels as u32 + 6;
        // the reference depends only on the model-defining fields, not on
        // seeds or estimator settings
        let key = format!(
            "overkill:v1:model={}:theta={}:rho={}:n_modes={}:dim={}:levels={}:fem={:?}:surrogate={:?}:work_levels={:?}:rank={rank}",
            config.model,
            config.theta,
            config.rho,
            config.n_modes,
            config.truncation_dim(),
            config.levels,
            config.fem,
            config.surrogate,
            config.work_levels,
        );
        let value = oracle::cached_reference(cache_dir, &key, || {
            let w = build_work_levels(rank, weights, &deep_dims, 1, &opts)?;
            let report = match overkill {
                Model::Analytic(s) => ml_quadrature(s, &w, config.truncation_dim())?,
                Model::Fem(s) => ml_quadrature(s, &w, config.truncation_dim())?,
            };
            Ok(report.value)
        })
        .map_err(|e| CliError::Numerical(format!("overkill reference: {e}")))?;
        Ok(value)
    }

    /// Truth value for the interpolation error at a test point: the limit
    /// for the analytic model, one level beyond the finest for the cavity.
    fn truth_at(&self, y: &[f64]) -> Result<Complex64, UqError> {
        match &self.overkill {
            Model::Analytic(s) => Ok(s.value(y)),
            Model::Fem(s) => {
                let deep = LevelSolver::<Complex64>::num_levels(s);
                LevelSolver::<Complex64>::evaluate(s, deep, y)
            }
        }
    }
}

/// One experiment cell.
pub struct Cell {
    pub estimator: String,
    pub budget_rank: u32,
    pub work: u64,
    pub error: f64,
}

pub fn run_experiment(config: &ExperimentConfig, cache_dir: &Path) -> Result<Vec<Cell>, CliError> {
    let bench = Bench::prepare(config, cache_dir)?;
    let stream = RandomStream::new(config.seed);
    let dim = config.truncation_dim();
    let mut cells = Vec::new();
    for estimator in &config.estimators {
        for &rank in &config.budgets {
            if estimator == "mlmc" && rank as usize > config.levels {
                continue; // deeper ranks repeat the L = levels cell
            }
            let cell = run_cell(config, &bench, estimator, rank, &stream, dim)
                .map_err(|e| CliError::Numerical(format!("{estimator} at rank {rank}: {e}")))?;
            cells.push(cell);
        }
    }
    Ok(cells)
}

fn run_cell(
    config: &ExperimentConfig,
    bench: &Bench,
    estimator: &str,
    rank: u32,
    stream: &RandomStream,
    dim: usize,
) -> Result<Cell, UqError> {
    let finest = config.levels;
    let opts = config.work_level_options();
    let (work, error) = match estimator {
        "mc" => {
            let n = 1u64 << (3 + rank);
            let mut total = 0.0;
            for rep in 0..config.repetitions {
                let sub = stream.substream(TAG_MC + (rank as u64) * (1 << 20) + rep as u64);
                let f = |y: &[f64]| -> Result<Complex64, UqError> {
                    eval_level(&bench.model, finest, y)
                };
                let est = mc_estimate(&shape_uq_core::smolyak::FallibleFn(f), n, &sub, dim)?;
                total += (est - bench.reference).norm_sqr();
            }
            let rmse = (total / config.repetitions as f64).sqrt();
            (n * bench.dims[finest - 1] as u64, rmse)
        }
        "mlmc" => {
            // the samples-file override belongs to the standalone mlmc
            // subcommand; the budget ladder always uses the formula
            let levels = (rank as usize).min(finest);
            let alloc = allocate_samples(levels, 1, 0.5, config.mlmc_delta, config.mlmc_c)?;
            let sub = stream.substream(TAG_MLMC + rank as u64);
            let rmse = match &bench.model {
                Model::Analytic(s) => {
                    mlmc_rmse(s, &alloc, &bench.reference, config.repetitions, &sub, dim)?
                }
                Model::Fem(s) => {
                    mlmc_rmse(s, &alloc, &bench.reference, config.repetitions, &sub, dim)?
                }
            };
            (mlmc_work(&alloc, &bench.dims[..levels]), rmse)
        }
        "smolyak" => {
            // single level: the finest discretization under a growing set
            let single_dims = [bench.dims[finest - 1]];
            let w = build_work_levels(rank, &bench.weights, &single_dims, 1, &opts)?;
            let report = match &bench.model {
                Model::Analytic(s) => {
                    let top = FinestOnly { inner: s, level: finest };
                    ml_quadrature(&top, &w, dim)?
                }
                Model::Fem(s) => {
                    let top = FinestOnly { inner: s, level: finest };
                    ml_quadrature(&top, &w, dim)?
                }
            };
            (report.work, (report.value - bench.reference).norm())
        }
        "ml-smolyak-quad" => {
            let w = build_work_levels(rank, &bench.weights, &bench.dims, 1, &opts)?;
            let report = match &bench.model {
                Model::Analytic(s) => ml_quadrature(s, &w, dim)?,
                Model::Fem(s) => ml_quadrature(s, &w, dim)?,
            };
            (report.work, (report.value - bench.reference).norm())
        }
        "ml-smolyak-interp" => {
            let w = build_work_levels(rank, &bench.weights, &bench.dims, 1, &opts)?;
            let work = w.work()?;
            let mut max_err = 0.0f64;
            for t in 0..config.test_points {
                let y = stream
                    .substream(TAG_TEST_POINTS)
                    .point(0, t as u64, dim);
                let value = match &bench.model {
                    Model::Analytic(s) => ml_interpolate(s, &w, dim, &y)?,
                    Model::Fem(s) => ml_interpolate(s, &w, dim, &y)?,
                };
                let truth = bench.truth_at(&y)?;
                max_err = max_err.max((value - truth).norm());
            }
            (work, max_err)
        }
        other => {
            return Err(UqError::InvalidParameter(format!(
                "unknown estimator {other}"
            )))
        }
    };
    Ok(Cell {
        estimator: estimator.to_string(),
        budget_rank: rank,
        work,
        error,
    })
}

/// View of a hierarchy exposing only its finest level as level 1.
struct FinestOnly<'a, S> {
    inner: &'a S,
    level: usize,
}

impl<S: LevelSolver<Complex64>> LevelSolver<Complex64> for FinestOnly<'_, S> {
    fn num_levels(&self) -> usize {
        1
    }
    fn dim(&self, _level: usize) -> usize {
        self.inner.dim(self.level)
    }
    fn evaluate(&self, _level: usize, y: &[f64]) -> Result<Complex64, UqError> {
        self.inner.evaluate(self.level, y)
    }
}

pub fn cells_to_csv(config: &ExperimentConfig, cells: &[Cell]) -> CsvDoc {
    let mut doc = CsvDoc::new("estimator,rho,budget_rank,work,error");
    for cell in cells {
        doc.row(&[
            cell.estimator.clone(),
            fmt_f64(config.rho),
            cell.budget_rank.to_string(),
            cell.work.to_string(),
            fmt_f64(cell.error),
        ]);
    }
    doc
}

/// Default cache directory: `.oracle-cache` next to the output file, or in
/// the working directory.
pub fn cache_dir_for(out: Option<&PathBuf>) -> PathBuf {
    match out {
        Some(path) => path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(|p| p.join(".oracle-cache"))
            .unwrap_or_else(|| PathBuf::from(".oracle-cache")),
        None => PathBuf::from(".oracle-cache"),
    }
}
