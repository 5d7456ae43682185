//! Multilevel Smolyak interpolation and quadrature: work-level assignments,
//! the induced nested index sets, the telescoped operators and the
//! DoF-weighted work accounting.
//!
//! A work-level assignment maps each multi-index to a finite-element space
//! dimension (or zero); thresholding at the level-`j` dimension yields the
//! nested downward-closed sets over which the level-`j` telescoping
//! difference is interpolated or integrated. Work counts the degrees of
//! freedom of every discrete solve the operators require:
//! `sum_j (dim_j + dim_{j-1}) |Gamma_j|`.

use std::collections::BTreeMap;

use crate::error::UqError;
use crate::models::{level_difference, LevelSolver};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::smolyak::{combined_interp_weights, combined_quad_weights, node_coordinates};
use crate::value::{weighted_pairwise_sum, ValueSpace};
use crate::mlmc::EstimatorReport;

/// Finitely supported assignment of FE-space dimensions to multi-indices.
#[derive(Clone, Debug)]
pub struct WorkLevels {
    /// `nu -> w_nu`, entries strictly positive (zero assignments are absent).
    pub assignment: BTreeMap<MultiIndex, usize>,
    /// Strictly increasing dimensions of the discretization levels.
    pub level_dims: Vec<usize>,
}

impl WorkLevels {
    pub fn new(
        assignment: BTreeMap<MultiIndex, usize>,
        level_dims: Vec<usize>,
    ) -> Result<Self, UqError> {
        if level_dims.is_empty() || level_dims.windows(2).any(|w| w[1] <= w[0]) {
            return Err(UqError::InvalidParameter(
                "level_dims must be nonempty and strictly increasing".into(),
            ));
        }
        for (nu, w) in &assignment {
            if *w != 0 && !level_dims.contains(w) {
                return Err(UqError::InvalidParameter(format!(
                    "work level {w} of {nu} is not a level dimension"
                )));
            }
        }
        let assignment = assignment.into_iter().filter(|(_, w)| *w > 0).collect();
        Ok(Self {
            assignment,
            level_dims,
        })
    }

    /// `Gamma_j = { nu : w_nu >= dim_j }` for each level with a nonempty set,
    /// each validated downward closed (levels are 1-based positions in the
    /// returned list).
    pub fn gamma_sets(&self) -> Result<Vec<IndexSet>, UqError> {
        let mut out = Vec::new();
        for (j, &dim) in self.level_dims.iter().enumerate() {
            let set: IndexSet = self
                .assignment
                .iter()
                .filter(|(_, &w)| w >= dim)
                .map(|(nu, _)| nu.clone())
                .collect();
            if set.is_empty() {
                break;
            }
            if let Err(UqError::NotDownwardClosed { missing, of }) =
                set.validate_downward_closed()
            {
                return Err(UqError::GammaNotDownwardClosed {
                    level: j + 1,
                    missing,
                    of,
                });
            }
            out.push(set);
        }
        Ok(out)
    }

    /// Total DoF-weighted work `sum_j (dim_j + dim_{j-1}) |Gamma_j|`.
    pub fn work(&self) -> Result<u64, UqError> {
        let gammas = self.gamma_sets()?;
        Ok(gammas
            .iter()
            .enumerate()
            .map(|(idx, g)| {
                let fine = self.level_dims[idx] as u64;
                let coarse = if idx == 0 {
                    0
                } else {
                    self.level_dims[idx - 1] as u64
                };
                (fine + coarse) * g.len() as u64
            })
            .sum())
    }
}

/// Knobs of the a-priori work-level construction.
#[derive(Clone, Debug)]
pub struct WorkLevelOptions {
    /// Dimension-decay exponent of the level bias (`error ~ dim^-alpha`);
    /// the 2D quantity-of-interest default is `k`.
    pub alpha: f64,
    /// Threshold schedule exponent `t_j = t_1 (dim_j / dim_1)^kappa`;
    /// `None` selects the default `1 + alpha`.
    pub kappa: Option<f64>,
    /// Base threshold multiplier; the budget rank scales it down.
    pub t0: f64,
    /// Levels beyond the first activate only once their threshold has
    /// dropped to this value, so a fresh level starts with a set that
    /// already resolves the dominant monomials instead of a bare anchor.
    pub activation: f64,
    /// Budget increments per discretization level (the rank-to-threshold
    /// cadence); 2 gives a half-level per increment.
    pub steps_per_level: u32,
}

impl WorkLevelOptions {
    pub fn for_rate(alpha: f64) -> Self {
        Self {
            alpha,
            kappa: None,
            t0: 1.0,
            activation: 0.05,
            steps_per_level: 2,
        }
    }
}

/// A-priori work levels from per-dimension weights: level sets are the
/// weighted-product sets `Lambda(t_j) = { nu : prod_j beta_j^nu_j >= t_j }`
/// with the threshold schedule `t_j = t_1 (dim_j / dim_1)^kappa`, anchored so
/// that increasing the budget rank `n` lowers all thresholds monotonically
/// and activates one further level per increment.
pub fn build_work_levels(
    budget_rank: u32,
    weights: &[f64],
    level_dims: &[usize],
    k: usize,
    opts: &WorkLevelOptions,
) -> Result<WorkLevels, UqError> {
    if budget_rank < 1 {
        return Err(UqError::InvalidParameter("budget rank must be >= 1".into()));
    }
    if k < 1 {
        return Err(UqError::InvalidParameter("k must be >= 1".into()));
    }
    if weights.is_empty() || weights.iter().any(|b| !(0.0 < *b && *b < 1.0)) {
        return Err(UqError::InvalidParameter(
            "weights must be nonempty with 0 < beta_j < 1".into(),
        ));
    }
    if level_dims.is_empty() || level_dims.windows(2).any(|w| w[1] <= w[0]) {
        return Err(UqError::InvalidParameter(
            "level_dims must be nonempty and strictly increasing".into(),
        ));
    }
    let kappa = opts.kappa.unwrap_or(1.0 + opts.alpha);
    // each budget increment scales thresholds by a fixed fraction of the
    // per-level dimension ratio to the kappa; rank 1 sits at t0, where only
    // the zero index survives
    let dim_ratio = level_dims[level_dims.len() - 1] as f64 / level_dims[0] as f64;
    let per_level = if level_dims.len() > 1 {
        dim_ratio.powf(1.0 / (level_dims.len() - 1) as f64)
    } else {
        4.0
    };
    let zeta = per_level.powf(kappa / opts.steps_per_level.max(1) as f64);
    let t1 = opts.t0 * zeta.powi(1 - budget_rank as i32);

    let mut assignment: BTreeMap<MultiIndex, usize> = BTreeMap::new();
    for (j, &dim) in level_dims.iter().enumerate() {
        let t_j = t1 * (dim as f64 / level_dims[0] as f64).powf(kappa);
        let cutoff = if j == 0 { opts.t0 } else { opts.activation };
        if t_j > cutoff {
            break;
        }
        // Lambda(t_j): every member gets its work level raised to dim_j
        enumerate_weight_set(weights, t_j, |nu| {
            assignment.insert(nu, dim);
        });
    }
    WorkLevels::new(assignment, level_dims.to_vec())
}

/// Enumerate `{ nu : prod beta_j^nu_j >= t }` for `t <= 1` by depth-first
/// descent over dimensions.
fn enumerate_weight_set(weights: &[f64], t: f64, mut f: impl FnMut(MultiIndex)) {
    fn rec(
        weights: &[f64],
        t: f64,
        dim: usize,
        budget: f64,
        current: &mut MultiIndex,
        f: &mut impl FnMut(MultiIndex),
    ) {
        if dim > weights.len() {
            f(current.clone());
            return;
        }
        let beta = weights[dim - 1];
        let mut factor = 1.0;
        let mut v = 0u32;
        loop {
            if budget * factor < t {
                break;
            }
            current.set(dim, v);
            rec(weights, t, dim + 1, budget * factor, current, f);
            factor *= beta;
            v += 1;
        }
        current.set(dim, 0);
    }
    let mut current = MultiIndex::zero();
    rec(weights, t, 1, 1.0, &mut current, &mut f);
}

/// The multilevel quadrature operator
/// `sum_j Q_{Gamma_j}(f_j - f_{j-1})`, with per-level evaluation caching and
/// coarse values prolonged into the finest active space.
pub fn ml_quadrature<V: ValueSpace, S: LevelSolver<V>>(
    solver: &S,
    work_levels: &WorkLevels,
    dim: usize,
) -> Result<EstimatorReport<V>, UqError> {
    ml_apply(solver, work_levels, dim, None)
}

/// The multilevel interpolation operator evaluated at `y`:
/// `sum_j I_{Gamma_j}(f_j - f_{j-1})(y)`.
pub fn ml_interpolate<V: ValueSpace, S: LevelSolver<V>>(
    solver: &S,
    work_levels: &WorkLevels,
    dim: usize,
    y: &[f64],
) -> Result<V, UqError> {
    ml_apply(solver, work_levels, dim, Some(y)).map(|r| r.value)
}

fn ml_apply<V: ValueSpace, S: LevelSolver<V>>(
    solver: &S,
    work_levels: &WorkLevels,
    dim: usize,
    interpolation_point: Option<&[f64]>,
) -> Result<EstimatorReport<V>, UqError> {
    let gammas = work_levels.gamma_sets()?;
    if gammas.is_empty() {
        return Err(UqError::InvalidParameter(
            "work levels activate no discretization level".into(),
        ));
    }
    if gammas.len() > solver.num_levels() {
        return Err(UqError::InvalidParameter(format!(
            "work levels span {} levels but the hierarchy has {}",
            gammas.len(),
            solver.num_levels()
        )));
    }
    let finest = gammas.len();
    let mut total: Option<V> = None;
    let mut per_level = Vec::with_capacity(finest);
    for (idx, gamma) in gammas.iter().enumerate() {
        let level = idx + 1;
        let weights = match interpolation_point {
            Some(y) => combined_interp_weights(gamma, y)?,
            None => combined_quad_weights(gamma)?,
        };
        let mut terms: Vec<(f64, V)> = Vec::with_capacity(weights.len());
        for (mu, w) in &weights {
            let y = node_coordinates(mu, dim);
            let diff = level_difference(solver, level, &y)?;
            terms.push((*w, diff));
        }
        let level_sum = weighted_pairwise_sum(&terms).expect("gamma sets are nonempty");
        let lifted = solver.prolong(&level_sum, level, finest)?;
        match &mut total {
            None => total = Some(lifted),
            Some(t) => t.add_scaled(1.0, &lifted),
        }
        per_level.push((level, gamma.len() as u64, solver.dim(level)));
    }
    Ok(EstimatorReport {
        value: total.expect("at least one level"),
        per_level,
        work: work_levels.work()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::AnalyticSurrogate;
    use crate::smolyak::{smolyak_interpolate, smolyak_quadrature};
    use num_complex::Complex64;

    fn mi(dense: &[u32]) -> MultiIndex {
        MultiIndex::from_dense(dense)
    }

    #[test]
    fn gamma_set_examples() {
        // dims (8, 40); w: {0 -> 40, (1) -> 8}
        let mut assignment = BTreeMap::new();
        assignment.insert(MultiIndex::zero(), 40usize);
        assignment.insert(mi(&[1]), 8usize);
        let w = WorkLevels::new(assignment, vec![8, 40]).unwrap();
        let gammas = w.gamma_sets().unwrap();
        assert_eq!(gammas.len(), 2);
        assert_eq!(gammas[0].len(), 2);
        assert_eq!(gammas[1].len(), 1);
        assert!(gammas[1].contains(&MultiIndex::zero()));
        assert_eq!(w.work().unwrap(), 8 * 2 + 48);

        // empty assignment: no levels active
        let w = WorkLevels::new(BTreeMap::new(), vec![8, 40]).unwrap();
        assert!(w.gamma_sets().unwrap().is_empty());
        assert_eq!(w.work().unwrap(), 0);

        // single level, single index
        let mut assignment = BTreeMap::new();
        assignment.insert(MultiIndex::zero(), 8usize);
        let w = WorkLevels::new(assignment, vec![8, 40]).unwrap();
        let gammas = w.gamma_sets().unwrap();
        assert_eq!(gammas.len(), 1);
        assert_eq!(w.work().unwrap(), 8);
    }

    #[test]
    fn non_downward_closed_gamma_reports_level() {
        let mut assignment = BTreeMap::new();
        assignment.insert(MultiIndex::zero(), 40usize);
        assignment.insert(mi(&[1]), 40usize);
        assignment.insert(mi(&[2]), 8usize);
        // Gamma_1 = {0, (1), (2)} closed; Gamma_2 = {0, (1)} closed -- now
        // break Gamma_2 by removing (1) from the fine set
        assignment.insert(mi(&[1]), 8usize);
        assignment.insert(mi(&[2]), 40usize);
        let w = WorkLevels::new(assignment, vec![8, 40]).unwrap();
        match w.gamma_sets() {
            Err(UqError::GammaNotDownwardClosed { level, .. }) => assert_eq!(level, 2),
            other => panic!("expected level-2 failure, got {other:?}"),
        }
    }

    #[test]
    fn weight_set_enumeration_example() {
        // beta_j = 2^-j, t = 1/4 admits {0, (1), (2), (0,1)}
        let weights = [0.5, 0.25, 0.125];
        let mut set = IndexSet::new();
        enumerate_weight_set(&weights, 0.25, |nu| {
            set.insert(nu);
        });
        assert_eq!(set.len(), 4);
        for nu in [mi(&[]), mi(&[1]), mi(&[2]), mi(&[0, 1])] {
            assert!(set.contains(&nu), "missing {nu}");
        }
        assert!(set.is_downward_closed());
    }

    #[test]
    fn build_is_nested_monotone_and_closed() {
        let weights: Vec<f64> = (1..=8).map(|j| 0.5 * (j as f64).powf(-2.0)).collect();
        let dims = vec![8, 40, 176, 736];
        let opts = WorkLevelOptions::for_rate(1.0);
        let mut prev_work = 0u64;
        let mut prev_sizes: Vec<usize> = Vec::new();
        for rank in 1..=6u32 {
            let w = build_work_levels(rank, &weights, &dims, 1, &opts).unwrap();
            let gammas = w.gamma_sets().unwrap();
            for g in &gammas {
                assert!(g.is_downward_closed());
            }
            for pair in gammas.windows(2) {
                for nu in pair[1].iter() {
                    assert!(pair[0].contains(nu), "Gamma sets must be nested");
                }
            }
            let sizes: Vec<usize> = gammas.iter().map(|g| g.len()).collect();
            for (idx, &s) in prev_sizes.iter().enumerate() {
                assert!(sizes.get(idx).copied().unwrap_or(0) >= s, "sizes must grow with rank");
            }
            let work = w.work().unwrap();
            assert!(work >= prev_work, "work must grow with rank");
            prev_work = work;
            prev_sizes = sizes;
        }

        // minimal budget: a single level with the zero index only
        let w = build_work_levels(1, &weights, &dims, 1, &opts).unwrap();
        let gammas = w.gamma_sets().unwrap();
        assert_eq!(gammas.len(), 1);
        assert_eq!(gammas[0].len(), 1);
        assert!(gammas[0].contains(&MultiIndex::zero()));

        assert!(build_work_levels(2, &[1.2], &dims, 1, &opts).is_err());
    }

    #[test]
    fn telescoping_consistency() {
        // identical levels: the multilevel operators collapse to the
        // single-level Smolyak operators over Gamma_1
        let surrogate =
            AnalyticSurrogate::new(2.0, 0.4, 2.0, 3, 0.0, 0.25, vec![8, 40, 176]).unwrap();
        let mut assignment = BTreeMap::new();
        for nu in [mi(&[]), mi(&[1]), mi(&[0, 1]), mi(&[2]), mi(&[1, 1])] {
            assignment.insert(nu, 176usize);
        }
        assignment.insert(mi(&[0, 0, 1]), 40usize);
        assignment.insert(mi(&[3]), 8usize);
        let w = WorkLevels::new(assignment, vec![8, 40, 176]).unwrap();
        let gamma1 = &w.gamma_sets().unwrap()[0];

        let f = |y: &[f64]| surrogate.value(y);
        let quad_ml = ml_quadrature(&surrogate, &w, 3).unwrap();
        let quad_sl: Complex64 = smolyak_quadrature(gamma1, 3, &f).unwrap();
        assert!((quad_ml.value - quad_sl).norm() < 1e-12);

        let y = [0.3, -0.5, 0.8];
        let interp_ml = ml_interpolate(&surrogate, &w, 3, &y).unwrap();
        let interp_sl: Complex64 = smolyak_interpolate(gamma1, 3, &f, &y).unwrap();
        assert!((interp_ml - interp_sl).norm() < 1e-12);
    }

    #[test]
    fn two_level_polynomial_telescoping_is_exact() {
        // levels f_1, f_2 with a difference in the span of Gamma_2: the
        // multilevel interpolant reproduces f_2 exactly when Gamma_1 also
        // spans f_1
        #[derive(Clone)]
        struct TwoLevel;
        impl LevelSolver<Complex64> for TwoLevel {
            fn num_levels(&self) -> usize {
                2
            }
            fn dim(&self, level: usize) -> usize {
                [8, 40][level - 1]
            }
            fn evaluate(&self, level: usize, y: &[f64]) -> Result<Complex64, UqError> {
                // f_1 = y1 y2, f_2 - f_1 = 0.5 y1
                let f1 = y[0] * y[1];
                let v = match level {
                    1 => f1,
                    _ => f1 + 0.5 * y[0],
                };
                Ok(Complex64::new(v, 0.0))
            }
        }
        let mut assignment = BTreeMap::new();
        for nu in [mi(&[]), mi(&[1]), mi(&[0, 1]), mi(&[1, 1])] {
            assignment.insert(nu, 40usize);
        }
        let w = WorkLevels::new(assignment, vec![8, 40]).unwrap();
        let y = [0.7, -0.4];
        let v = ml_interpolate(&TwoLevel, &w, 2, &y).unwrap();
        let exact = y[0] * y[1] + 0.5 * y[0];
        assert!((v.re - exact).abs() < 1e-13, "{} vs {exact}", v.re);

        let q = ml_quadrature(&TwoLevel, &w, 2).unwrap();
        assert!(q.value.norm() < 1e-13, "odd monomials integrate to zero");
    }

    #[test]
    fn work_matches_instrumented_evaluations() {
        use std::cell::Cell;

        // wrap the surrogate with an evaluation counter weighted by DoFs:
        // each level-j difference costs dim_j + dim_{j-1} per point
        struct Counting<'a> {
            inner: &'a AnalyticSurrogate,
            cost: &'a Cell<u64>,
        }
        impl LevelSolver<Complex64> for Counting<'_> {
            fn num_levels(&self) -> usize {
                self.inner.num_levels()
            }
            fn dim(&self, level: usize) -> usize {
                LevelSolver::<Complex64>::dim(self.inner, level)
            }
            fn evaluate(&self, level: usize, y: &[f64]) -> Result<Complex64, UqError> {
                self.cost.set(self.cost.get() + self.dim(level) as u64);
                self.inner.evaluate(level, y)
            }
        }

        let surrogate = AnalyticSurrogate::default_config(2.0, 6, 4).unwrap();
        let weights: Vec<f64> = (1..=6).map(|j| 0.5 * (j as f64).powf(-2.0)).collect();
        let dims: Vec<usize> =
            (1..=4).map(|i| LevelSolver::<Complex64>::dim(&surrogate, i)).collect();
        let w = build_work_levels(4, &weights, &dims, 1, &WorkLevelOptions::for_rate(2.0 / 3.0))
            .unwrap();
        let cost = Cell::new(0u64);
        let counting = Counting {
            inner: &surrogate,
            cost: &cost,
        };
        let report = ml_quadrature(&counting, &w, 6).unwrap();
        assert_eq!(
            cost.get(),
            report.work,
            "instrumented DoF cost must equal work(w); sets {:?}",
            report.per_level
        );
    }
}
