//! `shape-uq`: experiment runner for multilevel Monte Carlo and multilevel
//! Smolyak quadrature over the parametric 2D lossy cavity and its analytic
//! surrogate.
//!
//! Every subcommand emits versioned CSV (`# shape-uq v1`), writes to `--out`
//! or stdout, and derives all randomness from `--seed`. Exit codes: 0 on
//! success, 2 on configuration errors, 3 on numerical failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use shape_uq_core::fem::{EdgeSpace, ManufacturedCavity};
use shape_uq_core::leja;
use shape_uq_core::mlmc::{allocate_samples, mlmc_estimate, mlmc_rmse, RandomStream, SampleAllocation};
use shape_uq_core::models::LevelSolver;
use shape_uq_core::multiindex::IndexSet;
use shape_uq_core::smolyak;

use shape_uq_cli::config::ExperimentConfig;
use shape_uq_cli::experiment::{self, cache_dir_for, cells_to_csv, run_experiment, Model};
use shape_uq_cli::output::{fmt_f64, write_file, CsvDoc};
use shape_uq_cli::ratefit;
use shape_uq_cli::CliError;

#[derive(Parser)]
#[command(name = "shape-uq", version, about = "Multilevel UQ toolkit for the parametric lossy cavity")]
struct Cli {
    /// Configuration file (JSON); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print Leja nodes and quadrature weights as `index,node,weight`.
    Leja {
        #[arg(long)]
        n: usize,
    },
    /// Smolyak quadrature of a model over an index set from a JSON file.
    SmolyakQuad {
        #[arg(long)]
        dim: usize,
        /// JSON array of dense multi-index arrays.
        #[arg(long)]
        set: PathBuf,
        /// `analytic` or `fem-cavity`.
        #[arg(long)]
        model: String,
    },
    /// Multilevel Monte Carlo estimate and RMSE: `L,work,estimate_re,estimate_im,rmse`.
    Mlmc {
        #[arg(long)]
        levels: usize,
        /// JSON array of per-level sample counts overriding the allocation
        /// formula.
        #[arg(long)]
        samples_file: Option<PathBuf>,
    },
    /// Multilevel Smolyak quadrature over the configured budgets:
    /// `n,work,value,error_vs_reference`.
    MlSmolyak,
    /// Manufactured-solution convergence study: `level,h,dim,hcurl_error,qoi_error`.
    FemConvergence {
        #[arg(long)]
        levels: usize,
        /// Dump the finest mesh as JSON to this path.
        #[arg(long)]
        dump_mesh: Option<PathBuf>,
    },
    /// Jacobian-determinant bounds and admissibility of a parameter point.
    GeometryCheck {
        /// JSON array with the parameter point.
        #[arg(long)]
        y_file: PathBuf,
    },
    /// Full error-versus-work study: `estimator,rho,budget_rank,work,error`.
    Experiment,
    /// Fit a log-log rate to an experiment CSV: `estimator,slope,ci_low,ci_high,points`.
    FitRate {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        estimator: String,
        /// Bootstrap resamples for the confidence interval.
        #[arg(long, default_value_t = 200)]
        bootstrap: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("shape-uq: {e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Numerical(_) => ExitCode::from(3),
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Leja { n } => {
            let nodes = leja::leja_points(*n);
            let weights = leja::quad_weights_1d(*n);
            let mut doc = CsvDoc::new("index,node,weight");
            for (i, (x, w)) in nodes.iter().zip(weights.iter()).enumerate() {
                doc.row(&[i.to_string(), fmt_f64(*x), fmt_f64(*w)]);
            }
            doc.emit(cli.out.as_ref())
        }
        Command::SmolyakQuad { dim, set, model } => {
            let config = load_config(&cli)?;
            let text = std::fs::read_to_string(set)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", set.display())))?;
            let set: IndexSet = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("index set: {e}")))?;
            let value = match model.as_str() {
                "analytic" => {
                    let s = config.build_surrogate(config.levels)?;
                    let f = |y: &[f64]| s.value(y);
                    smolyak::smolyak_quadrature(&set, *dim, &f)?
                }
                "fem-cavity" => {
                    let s = config.build_cavity(config.levels)?;
                    let finest = config.levels;
                    let f = smolyak::FallibleFn(|y: &[f64]| {
                        LevelSolver::<Complex64>::evaluate(&s, finest, y)
                    });
                    smolyak::smolyak_quadrature(&set, *dim, &f)?
                }
                other => {
                    return Err(CliError::Config(format!(
                        "model: expected \"analytic\" or \"fem-cavity\", got \"{other}\""
                    )))
                }
            };
            let points = smolyak::grid_points(&set)?.len();
            let mut doc = CsvDoc::new("value_re,value_im,points");
            doc.row(&[fmt_f64(value.re), fmt_f64(value.im), points.to_string()]);
            doc.emit(cli.out.as_ref())
        }
        Command::Mlmc {
            levels,
            samples_file,
        } => {
            let config = load_config(&cli)?;
            let file_from_config = config.samples_file.as_ref().map(PathBuf::from);
            let alloc = match samples_file.as_ref().or(file_from_config.as_ref()) {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        CliError::Config(format!("cannot read {}: {e}", path.display()))
                    })?;
                    let counts: Vec<u64> = serde_json::from_str(&text)
                        .map_err(|e| CliError::Config(format!("samples file: {e}")))?;
                    if counts.len() != *levels {
                        return Err(CliError::Config(format!(
                            "samples file has {} levels, expected {levels}",
                            counts.len()
                        )));
                    }
                    SampleAllocation::from_counts(counts)?
                }
                None => allocate_samples(*levels, 1, 0.5, config.mlmc_delta, config.mlmc_c)?,
            };
            let cache = cache_dir_for(cli.out.as_ref());
            let mut exp_config = config.clone();
            exp_config.levels = *levels;
            let bench = experiment::Bench::prepare(&exp_config, &cache)?;
            let stream = RandomStream::new(config.seed);
            let dim = config.truncation_dim();
            let (report, rmse) = match &bench.model {
                Model::Analytic(s) => (
                    mlmc_estimate(s, &alloc, &stream, dim)?,
                    mlmc_rmse(s, &alloc, &bench.reference, config.repetitions, &stream, dim)?,
                ),
                Model::Fem(s) => (
                    mlmc_estimate(s, &alloc, &stream, dim)?,
                    mlmc_rmse(s, &alloc, &bench.reference, config.repetitions, &stream, dim)?,
                ),
            };
            let mut doc = CsvDoc::new("L,work,estimate_re,estimate_im,rmse");
            doc.row(&[
                levels.to_string(),
                report.work.to_string(),
                fmt_f64(report.value.re),
                fmt_f64(report.value.im),
                fmt_f64(rmse),
            ]);
            doc.emit(cli.out.as_ref())
        }
        Command::MlSmolyak => {
            let config = load_config(&cli)?;
            let cache = cache_dir_for(cli.out.as_ref());
            let mut only_quad = config.clone();
            only_quad.estimators = vec!["ml-smolyak-quad".into()];
            let bench = experiment::Bench::prepare(&only_quad, &cache)?;
            let opts = only_quad.work_level_options();
            let dim = only_quad.truncation_dim();
            let mut doc = CsvDoc::new("n,work,value,error_vs_reference");
            for &rank in &only_quad.budgets {
                let w = shape_uq_core::ml_smolyak::build_work_levels(
                    rank,
                    &bench.weights,
                    &bench.dims,
                    1,
                    &opts,
                )?;
                for (idx, gamma) in w.gamma_sets()?.iter().enumerate() {
                    let json = serde_json::to_string(gamma)
                        .map_err(|e| CliError::Numerical(e.to_string()))?;
                    eprintln!("gamma[n={rank}][level={}] = {json}", idx + 1);
                }
                let report = match &bench.model {
                    Model::Analytic(s) => shape_uq_core::ml_smolyak::ml_quadrature(s, &w, dim)?,
                    Model::Fem(s) => shape_uq_core::ml_smolyak::ml_quadrature(s, &w, dim)?,
                };
                let error = (report.value - bench.reference).norm();
                doc.row(&[
                    rank.to_string(),
                    report.work.to_string(),
                    fmt_f64(report.value.re),
                    fmt_f64(error),
                ]);
            }
            doc.emit(cli.out.as_ref())
        }
        Command::FemConvergence { levels, dump_mesh } => {
            if *levels == 0 {
                return Err(CliError::Config("levels: must be >= 1".into()));
            }
            let weight = |x: [f64; 2]| {
                [
                    Complex64::new(1.0 - x[1] * x[1], 0.0),
                    Complex64::new(x[0] * x[1], 0.0),
                ]
            };
            let mut doc = CsvDoc::new("level,h,dim,hcurl_error,qoi_error");
            let mut finest: Option<EdgeSpace> = None;
            for level in 1..=*levels {
                let space = EdgeSpace::structured_level(level);
                let sol = ManufacturedCavity::solve_on(&space)?;
                let hcurl = ManufacturedCavity::hcurl_error(&space, &sol);
                let qerr = ManufacturedCavity::qoi_error(&space, &sol, &weight);
                doc.row(&[
                    level.to_string(),
                    fmt_f64(space.h),
                    space.dim.to_string(),
                    fmt_f64(hcurl),
                    fmt_f64(qerr),
                ]);
                finest = Some(space);
            }
            if let (Some(path), Some(space)) = (dump_mesh, finest) {
                let dump = serde_json::to_string_pretty(&space.mesh.dump())
                    .map_err(|e| CliError::Numerical(e.to_string()))?;
                write_file(path, &dump)?;
            }
            doc.emit(cli.out.as_ref())
        }
        Command::GeometryCheck { y_file } => {
            let config = load_config(&cli)?;
            let text = std::fs::read_to_string(y_file)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", y_file.display())))?;
            let y: Vec<f64> = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("parameter point: {e}")))?;
            if y.iter().any(|v| !(-1.0..=1.0).contains(v)) {
                return Err(CliError::Config(
                    "parameter point must lie in [-1, 1]^N".into(),
                ));
            }
            let bounds = config.parametric_map().jacobian_det_bounds(&y, 512);
            let mut doc = CsvDoc::new("min_det,max_det,admissible");
            doc.row(&[
                fmt_f64(bounds.min),
                fmt_f64(bounds.max),
                bounds.admissible().to_string(),
            ]);
            doc.emit(cli.out.as_ref())
        }
        Command::Experiment => {
            let config = load_config(&cli)?;
            let cache = cache_dir_for(cli.out.as_ref());
            let cells = run_experiment(&config, &cache)?;
            cells_to_csv(&config, &cells).emit(cli.out.as_ref())
        }
        Command::FitRate {
            csv,
            estimator,
            bootstrap,
        } => {
            let config = load_config(&cli)?;
            let text = std::fs::read_to_string(csv)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", csv.display())))?;
            let mut points = Vec::new();
            for line in text.lines() {
                if line.starts_with('#') || line.starts_with("estimator,") || line.is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 5 {
                    return Err(CliError::Config(format!("malformed CSV row: {line}")));
                }
                if fields[0] != estimator {
                    continue;
                }
                let work: f64 = fields[3]
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad work value: {}", fields[3])))?;
                let error: f64 = fields[4]
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad error value: {}", fields[4])))?;
                points.push((work, error));
            }
            let fit = ratefit::fit_rate(&points, *bootstrap, config.seed)?;
            let mut doc = CsvDoc::new("estimator,slope,ci_low,ci_high,points");
            doc.row(&[
                estimator.clone(),
                fmt_f64(fit.slope),
                fmt_f64(fit.ci_low),
                fmt_f64(fit.ci_high),
                fit.points.to_string(),
            ]);
            doc.emit(cli.out.as_ref())
        }
    }
}
