//! Monte Carlo and multilevel Monte Carlo estimators with the level sample
//! allocation `N_{L,i} = ceil(c * s^(2k(i-L)) * i^(2+2delta))` and the
//! DoF-weighted work model `sum_i N_{L,i} (dim_i + dim_{i-1})`.
//!
//! Randomness is counter-based: every uniform draw is a hash of
//! `(master seed, level, sample, coordinate)`, so estimates are bitwise
//! reproducible regardless of evaluation order, and sample sets at distinct
//! levels come from disjoint input blocks. Per-level accumulation uses a
//! fixed pairwise reduction tree.

use crate::error::UqError;
use crate::models::{level_difference, LevelSolver};
use crate::smolyak::ParametricFunction;
use crate::value::{pairwise_sum, ValueSpace};

/// Counter-based uniform stream on `[-1, 1]`.
#[derive(Clone, Copy, Debug)]
pub struct RandomStream {
    master: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master: splitmix(master_seed),
        }
    }

    /// An independent stream for repetition `tag` of an experiment.
    pub fn substream(&self, tag: u64) -> Self {
        Self {
            master: splitmix(self.master ^ splitmix(tag.wrapping_add(0x5851f42d4c957f2d))),
        }
    }

    /// Uniform draw in `[-1, 1]`, a pure function of the counters.
    pub fn uniform(&self, level: u64, sample: u64, coordinate: u64) -> f64 {
        let mut h = self.master;
        h = splitmix(h ^ level);
        h = splitmix(h ^ sample);
        h = splitmix(h ^ coordinate);
        (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    /// A sample point in `[-1, 1]^dim`.
    pub fn point(&self, level: u64, sample: u64, dim: usize) -> Vec<f64> {
        (0..dim as u64).map(|c| self.uniform(level, sample, c)).collect()
    }
}

/// Per-level sample counts of the multilevel estimator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleAllocation {
    pub counts: Vec<u64>,
}

impl SampleAllocation {
    pub fn levels(&self) -> usize {
        self.counts.len()
    }

    /// Explicit counts (the `--samples-file` path); each level needs at
    /// least one sample.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self, UqError> {
        if counts.is_empty() || counts.contains(&0) {
            return Err(UqError::InvalidParameter(
                "sample counts must be nonempty and >= 1 at every level".into(),
            ));
        }
        Ok(Self { counts })
    }
}

/// The rate-balancing allocation `N_{L,i} = ceil(c * s^(2k(i-L)) * i^(2+2delta))`.
pub fn allocate_samples(
    levels: usize,
    k: usize,
    s: f64,
    delta: f64,
    c: f64,
) -> Result<SampleAllocation, UqError> {
    if levels < 1 {
        return Err(UqError::InvalidParameter("levels must be >= 1".into()));
    }
    if k < 1 {
        return Err(UqError::InvalidParameter("k must be >= 1".into()));
    }
    if !(0.0 < s && s < 1.0) {
        return Err(UqError::InvalidParameter(format!("s must be in (0,1), got {s}")));
    }
    if delta <= 0.0 || c <= 0.0 {
        return Err(UqError::InvalidParameter(
            "delta and c must be positive".into(),
        ));
    }
    let counts = (1..=levels)
        .map(|i| {
            let decay = s.powi((2 * k) as i32 * (i as i32 - levels as i32));
            let poly = (i as f64).powf(2.0 + 2.0 * delta);
            (c * decay * poly).ceil() as u64
        })
        .collect();
    Ok(SampleAllocation { counts })
}

/// `work = sum_i N_{L,i} (dim_i + dim_{i-1})` with `dim_0 = 0`.
pub fn mlmc_work(alloc: &SampleAllocation, dims: &[usize]) -> u64 {
    assert!(dims.len() >= alloc.levels(), "dims must cover every level");
    alloc
        .counts
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let fine = dims[idx] as u64;
            let coarse = if idx == 0 { 0 } else { dims[idx - 1] as u64 };
            n * (fine + coarse)
        })
        .sum()
}

/// Plain Monte Carlo mean of `f` over `n` i.i.d. uniform points.
pub fn mc_estimate<V: ValueSpace, F: ParametricFunction<V>>(
    f: &F,
    n: u64,
    stream: &RandomStream,
    dim: usize,
) -> Result<V, UqError> {
    if n == 0 {
        return Err(UqError::InvalidParameter("sample count must be >= 1".into()));
    }
    let mut values = Vec::with_capacity(n as usize);
    for i in 0..n {
        let y = stream.point(0, i, dim);
        values.push(f.eval(&y).map_err(|e| UqError::EstimatorFailure {
            level: 0,
            sample: i,
            source: Box::new(e),
        })?);
    }
    let mut mean = pairwise_sum(&values).expect("n >= 1");
    mean.scale_in_place(1.0 / n as f64);
    Ok(mean)
}

/// Estimate value plus the per-level accounting of an estimator run.
#[derive(Clone, Debug)]
pub struct EstimatorReport<V> {
    pub value: V,
    /// `(level, count, dim)` per level: sample counts for MLMC, index-set
    /// sizes for the multilevel Smolyak operators.
    pub per_level: Vec<(usize, u64, usize)>,
    pub work: u64,
}

/// The multilevel Monte Carlo estimator
/// `sum_i Q^MC_{N_i}(f_i - f_{i-1})` with positively coupled level pairs and
/// independent sample blocks per level.
pub fn mlmc_estimate<V: ValueSpace, S: LevelSolver<V>>(
    solver: &S,
    alloc: &SampleAllocation,
    stream: &RandomStream,
    dim: usize,
) -> Result<EstimatorReport<V>, UqError> {
    let levels = alloc.levels();
    if levels > solver.num_levels() {
        return Err(UqError::InvalidParameter(format!(
            "allocation spans {levels} levels but the hierarchy has {}",
            solver.num_levels()
        )));
    }
    let mut level_means: Vec<V> = Vec::with_capacity(levels);
    for (idx, &n) in alloc.counts.iter().enumerate() {
        let level = idx + 1;
        let mut values = Vec::with_capacity(n as usize);
        for i in 0..n {
            let y = stream.point(level as u64, i, dim);
            let diff =
                level_difference(solver, level, &y).map_err(|e| UqError::EstimatorFailure {
                    level,
                    sample: i,
                    source: Box::new(e),
                })?;
            values.push(diff);
        }
        let mut mean = pairwise_sum(&values).expect("n >= 1");
        mean.scale_in_place(1.0 / n as f64);
        level_means.push(mean);
    }
    // telescoped total in the finest space involved
    let mut total = solver.prolong(&level_means[0], 1, levels)?;
    for (idx, mean) in level_means.iter().enumerate().skip(1) {
        let lifted = solver.prolong(mean, idx + 1, levels)?;
        total.add_scaled(1.0, &lifted);
    }
    let dims: Vec<usize> = (1..=levels).map(|i| solver.dim(i)).collect();
    let work = mlmc_work(alloc, &dims);
    let per_level = alloc
        .counts
        .iter()
        .enumerate()
        .map(|(idx, &n)| (idx + 1, n, dims[idx]))
        .collect();
    Ok(EstimatorReport {
        value: total,
        per_level,
        work,
    })
}

/// Root-mean-square error of the estimator over `repetitions` independent
/// realizations against a reference value.
pub fn mlmc_rmse<V: ValueSpace, S: LevelSolver<V>>(
    solver: &S,
    alloc: &SampleAllocation,
    reference: &V,
    repetitions: u32,
    stream: &RandomStream,
    dim: usize,
) -> Result<f64, UqError> {
    if repetitions < 2 {
        return Err(UqError::InvalidParameter(
            "rmse needs at least 2 repetitions".into(),
        ));
    }
    let mut total = 0.0;
    for rep in 0..repetitions {
        let report = mlmc_estimate(solver, alloc, &stream.substream(rep as u64), dim)?;
        total += report.value.sub(reference).norm().powi(2);
    }
    Ok((total / repetitions as f64).sqrt())
}
