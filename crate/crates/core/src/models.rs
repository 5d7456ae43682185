//! The level-solver abstraction and its two instantiations: the FEM-backed
//! parametric cavity and a cheap analytic surrogate hierarchy with
//! closed-form expectations for estimator testing.

use num_complex::Complex64;

use crate::error::UqError;
use crate::fem::{
    assemble, build_hierarchy, qoi, solve, CoefficientFields, EdgeSpace, QuadraturePair,
    TriangleRule,
};
use crate::geometry::{Materials, ParametricMap, PolyField2};
use crate::value::ValueSpace;

/// A map `(level, y) -> value` over a hierarchy of discretizations with
/// strictly increasing dimensions. Levels are 1-based; level 0 is the zero
/// function with dimension 0 by convention.
pub trait LevelSolver<V: ValueSpace> {
    fn num_levels(&self) -> usize;

    /// Dimension of the level-`i` discrete space (`i >= 1`).
    fn dim(&self, level: usize) -> usize;

    /// Evaluate at a parameter point; must be pure in `(level, y)`.
    fn evaluate(&self, level: usize, y: &[f64]) -> Result<V, UqError>;

    /// Carry a value from a coarse level into a finer level's space. The
    /// identity for scalar quantities.
    fn prolong(&self, value: &V, _from: usize, _to: usize) -> Result<V, UqError> {
        Ok(value.clone())
    }

    /// Whether `evaluate` may be called concurrently.
    fn concurrency_safe(&self) -> bool {
        false
    }
}

/// The telescoping difference `f_level - f_(level-1)` at `y`, computed in the
/// level-`level` value space (`f_0 = 0`).
pub fn level_difference<V: ValueSpace, S: LevelSolver<V> + ?Sized>(
    solver: &S,
    level: usize,
    y: &[f64],
) -> Result<V, UqError> {
    let fine = solver.evaluate(level, y)?;
    if level == 1 {
        return Ok(fine);
    }
    let coarse = solver.evaluate(level - 1, y)?;
    let lifted = solver.prolong(&coarse, level - 1, level)?;
    Ok(fine.sub(&lifted))
}

/// Analytic surrogate `f(y) = 1 / (c0 + sum_j y_j gamma_j)` with level values
/// `f_i(y) = f(y) + b_i g(y)`, `b_i = b0 * bias_ratio^i`, `g(y) = y1 + y2^2`.
///
/// The weights and bias mirror the decay structure the multilevel theory
/// needs, while every expectation used as an estimator reference has a closed
/// form.
#[derive(Clone, Debug)]
pub struct AnalyticSurrogate {
    pub c0: f64,
    pub gammas: Vec<f64>,
    pub bias0: f64,
    pub bias_ratio: f64,
    pub level_dims: Vec<usize>,
}

impl AnalyticSurrogate {
    /// Weights `gamma_j = gamma0 * j^(-rho)`; fails unless
    /// `c0 - sum |gamma_j| > 0` (uniform well-posedness margin).
    pub fn new(
        c0: f64,
        gamma0: f64,
        rho: f64,
        n_modes: usize,
        bias0: f64,
        bias_ratio: f64,
        level_dims: Vec<usize>,
    ) -> Result<Self, UqError> {
        let gammas: Vec<f64> = (1..=n_modes)
            .map(|j| gamma0 * (j as f64).powf(-rho))
            .collect();
        let margin = c0 - gammas.iter().map(|g| g.abs()).sum::<f64>();
        if margin <= 0.0 {
            return Err(UqError::InvalidParameter(format!(
                "surrogate is not uniformly well-posed: c0 - sum |gamma| = {margin}"
            )));
        }
        if level_dims.windows(2).any(|w| w[1] <= w[0]) || level_dims.is_empty() {
            return Err(UqError::InvalidParameter(
                "level_dims must be nonempty and strictly increasing".into(),
            ));
        }
        Ok(Self {
            c0,
            gammas,
            bias0,
            bias_ratio,
            level_dims,
        })
    }

    /// The default experimental configuration: three active weights with the
    /// given decay, a 3D-like dimension schedule `dims_i = 8^i` and bias
    /// `b_i = b0 * ratio^i`.
    pub fn default_config(rho: f64, n_modes: usize, levels: usize) -> Result<Self, UqError> {
        let dims = (1..=levels).map(|i| 8usize.pow(i as u32)).collect();
        Self::new(2.0, 0.4, rho, n_modes, 1.0, 0.25, dims)
    }

    pub fn value(&self, y: &[f64]) -> Complex64 {
        let mut denom = self.c0;
        for (g, v) in self.gammas.iter().zip(y) {
            denom += g * v;
        }
        Complex64::new(1.0 / denom, 0.0)
    }

    /// The perturbation `g(y) = y1 + y2^2`.
    pub fn perturbation(y: &[f64]) -> Complex64 {
        let y1 = y.first().copied().unwrap_or(0.0);
        let y2 = y.get(1).copied().unwrap_or(0.0);
        Complex64::new(y1 + y2 * y2, 0.0)
    }

    pub fn bias_factor(&self, level: usize) -> f64 {
        self.bias0 * self.bias_ratio.powi(level as i32)
    }

    pub fn level_value(&self, level: usize, y: &[f64]) -> Complex64 {
        self.value(y) + self.bias_factor(level) * Self::perturbation(y)
    }

    /// Closed-form `E(f)` over the active weights: with
    /// `A_m(x) = x^m / m! (ln x - H_m)` the `m`-fold antiderivative of `1/x`,
    /// `E(f) = (prod_j 2 gamma_j)^(-1) sum_{s in {-1,1}^d} (prod s) A_{d-1}(c0 + s . gamma)`.
    ///
    /// Capped at four active weights; the alternating sum loses roughly the
    /// digits of `prod gamma_j`.
    pub fn closed_form_expectation(&self) -> Result<f64, UqError> {
        let active: Vec<f64> = self.gammas.iter().copied().filter(|g| *g != 0.0).collect();
        let d = active.len();
        if d > 4 {
            return Err(UqError::InvalidParameter(format!(
                "closed-form expectation capped at 4 active weights, got {d}"
            )));
        }
        if d == 0 {
            return Ok(1.0 / self.c0);
        }
        let antiderivative = |m: usize, x: f64| -> f64 {
            let mut fact = 1.0;
            let mut harmonic = 0.0;
            for i in 1..=m {
                fact *= i as f64;
                harmonic += 1.0 / i as f64;
            }
            x.powi(m as i32) / fact * (x.ln() - harmonic)
        };
        let mut total = 0.0;
        for mask in 0..(1u32 << d) {
            let mut sign = 1.0;
            let mut x = self.c0;
            for (j, g) in active.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    x += g;
                } else {
                    sign = -sign;
                    x -= g;
                }
            }
            total += sign * antiderivative(d - 1, x);
        }
        let denom: f64 = active.iter().map(|g| 2.0 * g).product();
        Ok(total / denom)
    }

    /// `E(g) = E(y1) + E(y2^2) = 1/3`.
    pub fn expectation_of_perturbation() -> f64 {
        1.0 / 3.0
    }

    /// Per-dimension weights for the a-priori index sets: the reciprocal
    /// Bernstein-ellipse radius of the 1D sections,
    /// `beta_j = 1 / (y* + sqrt(y*^2 - 1))` with `y* = c0 / gamma_j`, which
    /// is the geometric decay rate of their polynomial coefficients. When
    /// the level bias is active, its perturbation `y1 + y2^2` carries O(1)
    /// coefficients in the first two dimensions, so those weights are
    /// floored.
    pub fn smolyak_weights(&self) -> Vec<f64> {
        self.gammas
            .iter()
            .enumerate()
            .map(|(idx, g)| {
                let ystar = (self.c0 / g).abs().max(1.0 + 1e-12);
                let bernstein = 1.0 / (ystar + (ystar * ystar - 1.0).sqrt());
                if self.bias0 != 0.0 && idx < 2 {
                    bernstein.max(0.35)
                } else {
                    bernstein
                }
            })
            .collect()
    }

    /// Closed-form `E(f_level)`.
    pub fn closed_form_level_expectation(&self, level: usize) -> Result<f64, UqError> {
        Ok(self.closed_form_expectation()?
            + self.bias_factor(level) * Self::expectation_of_perturbation())
    }
}

impl LevelSolver<Complex64> for AnalyticSurrogate {
    fn num_levels(&self) -> usize {
        self.level_dims.len()
    }

    fn dim(&self, level: usize) -> usize {
        self.level_dims[level - 1]
    }

    fn evaluate(&self, level: usize, y: &[f64]) -> Result<Complex64, UqError> {
        Ok(self.level_value(level, y))
    }

    fn concurrency_safe(&self) -> bool {
        true
    }
}

/// Configuration of the FEM-backed parametric cavity.
#[derive(Clone, Debug)]
pub struct CavityConfig {
    pub map: ParametricMap,
    pub materials: Materials,
    pub omega: f64,
    pub qoi_weight: PolyField2,
    pub levels: usize,
}

impl Default for CavityConfig {
    fn default() -> Self {
        // the default weight g = (1 - x2^2, x1 x2) is a fixed degree-2 field
        let mut qoi_weight = PolyField2::zero();
        qoi_weight.coeffs[0][0] = Complex64::new(1.0, 0.0);
        qoi_weight.coeffs[0][5] = Complex64::new(-1.0, 0.0);
        qoi_weight.coeffs[1][4] = Complex64::new(1.0, 0.0);
        Self {
            map: ParametricMap::default(),
            materials: Materials::default(),
            omega: 1.0,
            qoi_weight,
            levels: 4,
        }
    }
}

/// The parametric cavity as a level solver: `evaluate(i, y)` assembles the
/// pulled-back forms on the level-`i` mesh at `sigma(y)`, solves, and either
/// applies the quantity of interest (scalar mode) or returns the DoF vector
/// (field mode).
pub struct FemCavitySolver {
    pub config: CavityConfig,
    pub spaces: Vec<EdgeSpace>,
    quad: QuadraturePair,
    qoi_rule: TriangleRule,
}

impl FemCavitySolver {
    pub fn new(config: CavityConfig) -> Result<Self, UqError> {
        if config.levels < 1 {
            return Err(UqError::InvalidParameter("levels must be >= 1".into()));
        }
        if config.qoi_weight.degree() > 2 {
            return Err(UqError::InvalidParameter(
                "qoi weight must have degree <= 2".into(),
            ));
        }
        Ok(Self {
            spaces: build_hierarchy(config.levels),
            config,
            quad: QuadraturePair::default(),
            qoi_rule: TriangleRule::degree3(),
        })
    }

    /// DoF vector of the pulled-back solve at `(level, y)`; failures carry
    /// the level and the offending parameter point.
    pub fn solve_level(&self, level: usize, y: &[f64]) -> Result<Vec<Complex64>, UqError> {
        let space = &self.spaces[level - 1];
        let with_point = |e: UqError| UqError::SolverFailure {
            level,
            detail: format!("{e} at y = {y:?}"),
        };
        let pb = self
            .config
            .map
            .pullback_coefficients(y, self.config.materials.clone())
            .map_err(with_point)?;
        let fields = CoefficientFields::from_pullback(&pb);
        let (matrix, rhs) = assemble(space, &fields, &self.quad, self.config.omega)?;
        solve(&matrix, &rhs, level).map_err(with_point)
    }

    /// The quantity of interest of a level solve.
    pub fn qoi_of(&self, level: usize, coeffs: &[Complex64]) -> Complex64 {
        let weight = &self.config.qoi_weight;
        qoi(
            &self.spaces[level - 1],
            coeffs,
            &|x| weight.eval(x),
            &self.qoi_rule,
        )
    }
}

impl LevelSolver<Complex64> for FemCavitySolver {
    fn num_levels(&self) -> usize {
        self.config.levels
    }

    fn dim(&self, level: usize) -> usize {
        self.spaces[level - 1].dim
    }

    fn evaluate(&self, level: usize, y: &[f64]) -> Result<Complex64, UqError> {
        let coeffs = self.solve_level(level, y)?;
        Ok(self.qoi_of(level, &coeffs))
    }

    fn concurrency_safe(&self) -> bool {
        true
    }
}

impl LevelSolver<Vec<Complex64>> for FemCavitySolver {
    fn num_levels(&self) -> usize {
        self.config.levels
    }

    fn dim(&self, level: usize) -> usize {
        self.spaces[level - 1].dim
    }

    fn evaluate(&self, level: usize, y: &[f64]) -> Result<Vec<Complex64>, UqError> {
        self.solve_level(level, y)
    }

    /// Nested-mesh injection of a coarse DoF vector into a finer space.
    fn prolong(&self, value: &Vec<Complex64>, from: usize, to: usize) -> Result<Vec<Complex64>, UqError> {
        let mut current = value.clone();
        for lvl in from..to {
            current = self.spaces[lvl].prolong_from(&self.spaces[lvl - 1], &current);
        }
        Ok(current)
    }

    fn concurrency_safe(&self) -> bool {
        true
    }
}
