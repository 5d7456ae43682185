//! Tensorized interpolation and quadrature operators and their Smolyak
//! combinations over downward-closed index sets.
//!
//! Every operator is expressed through combined per-point weights: for a
//! downward-closed set the union of tensor grids is exactly the set of node
//! multi-indices `{ (chi_{mu_j})_j : mu in set }`, so each parametric function
//! is evaluated once per grid point, keyed by the exact node multi-index.
//! Sums run in the canonical index order, which makes every result
//! reproducible bit for bit.

use std::collections::BTreeMap;

use crate::error::UqError;
use crate::leja::{lagrange_basis_at, leja_points, quad_weights_1d};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::value::{weighted_pairwise_sum, ValueSpace};

/// A deterministic map from parameter points in `[-1, 1]^d` to a value space.
pub trait ParametricFunction<V: ValueSpace> {
    fn eval(&self, y: &[f64]) -> Result<V, UqError>;
}

impl<V: ValueSpace, F: Fn(&[f64]) -> V> ParametricFunction<V> for F {
    fn eval(&self, y: &[f64]) -> Result<V, UqError> {
        Ok(self(y))
    }
}

/// A parametric function whose evaluator can fail.
pub struct FallibleFn<F>(pub F);

impl<V: ValueSpace, F: Fn(&[f64]) -> Result<V, UqError>> ParametricFunction<V> for FallibleFn<F> {
    fn eval(&self, y: &[f64]) -> Result<V, UqError> {
        (self.0)(y)
    }
}

/// Coordinates of the grid point associated with the node multi-index `mu`,
/// truncated to `dim` coordinates. Dimensions without an entry sit at the
/// anchor node `chi_0 = 1`.
pub fn node_coordinates(mu: &MultiIndex, dim: usize) -> Vec<f64> {
    let max_level = mu.support().map(|(_, v)| v).max().unwrap_or(0) as usize;
    let nodes = leja_points(max_level);
    let mut y = vec![nodes[0]; dim];
    for (d, v) in mu.support() {
        if d <= dim {
            y[d - 1] = nodes[v as usize];
        }
    }
    y
}

/// The grid points activated by a downward-closed set: the union over
/// nonzero-coefficient members of their tensor grids. For downward-closed
/// sets this is exactly one point per member of the set.
pub fn grid_points(set: &IndexSet) -> Result<Vec<MultiIndex>, UqError> {
    let coeffs = set.combination_coefficients()?;
    let mut points = BTreeMap::new();
    for (nu, c) in &coeffs {
        if *c == 0 {
            continue;
        }
        for_each_leq(nu, |mu| {
            points.entry(mu).or_insert(());
        });
    }
    Ok(points.into_keys().collect())
}

/// Enumerate all `mu <= nu` (over the support of `nu`).
fn for_each_leq(nu: &MultiIndex, mut f: impl FnMut(MultiIndex)) {
    let support: Vec<(usize, u32)> = nu.support().collect();
    let mut current = MultiIndex::zero();
    fn rec(
        support: &[(usize, u32)],
        pos: usize,
        current: &mut MultiIndex,
        f: &mut impl FnMut(MultiIndex),
    ) {
        if pos == support.len() {
            f(current.clone());
            return;
        }
        let (dim, bound) = support[pos];
        for v in 0..=bound {
            current.set(dim, v);
            rec(support, pos + 1, current, f);
        }
        current.set(dim, 0);
    }
    rec(&support, 0, &mut current, &mut f);
}

/// Combined quadrature weights of the Smolyak operator `Q_set`:
/// `W_mu = sum_{nu >= mu} c_nu * prod_j w^(nu_j)_(mu_j)`, in canonical order.
pub fn combined_quad_weights(set: &IndexSet) -> Result<Vec<(MultiIndex, f64)>, UqError> {
    let coeffs = set.combination_coefficients()?;
    let mut acc: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    for (nu, c) in &coeffs {
        if *c == 0 {
            continue;
        }
        let tables: Vec<(usize, std::sync::Arc<Vec<f64>>)> = nu
            .support()
            .map(|(d, v)| (d, quad_weights_1d(v as usize)))
            .collect();
        for_each_leq(nu, |mu| {
            let mut w = *c as f64;
            for (d, table) in &tables {
                w *= table[mu.get(*d) as usize];
            }
            *acc.entry(mu).or_insert(0.0) += w;
        });
    }
    Ok(acc.into_iter().collect())
}

/// Combined interpolation weights of `I_set` at the point `y`:
/// `W_mu(y) = sum_{nu >= mu} c_nu * prod_j l^(nu_j)_(mu_j)(y_j)`.
pub fn combined_interp_weights(
    set: &IndexSet,
    y: &[f64],
) -> Result<Vec<(MultiIndex, f64)>, UqError> {
    let coeffs = set.combination_coefficients()?;
    // Lagrange basis values per (dimension, level), evaluated lazily
    let mut basis: BTreeMap<(usize, u32), Vec<f64>> = BTreeMap::new();
    let mut acc: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    for (nu, c) in &coeffs {
        if *c == 0 {
            continue;
        }
        for (d, v) in nu.support() {
            basis.entry((d, v)).or_insert_with(|| {
                let x = if d <= y.len() { y[d - 1] } else { leja_points(0)[0] };
                lagrange_basis_at(v as usize, x)
            });
        }
        let tables: Vec<(usize, &Vec<f64>)> = nu
            .support()
            .map(|(d, v)| (d, basis.get(&(d, v)).expect("just inserted")))
            .collect();
        for_each_leq(nu, |mu| {
            let mut w = *c as f64;
            for (d, table) in &tables {
                w *= table[mu.get(*d) as usize];
            }
            *acc.entry(mu).or_insert(0.0) += w;
        });
    }
    Ok(acc.into_iter().collect())
}

fn apply_weights<V: ValueSpace, F: ParametricFunction<V>>(
    weights: &[(MultiIndex, f64)],
    dim: usize,
    f: &F,
) -> Result<Option<V>, UqError> {
    let mut terms: Vec<(f64, V)> = Vec::with_capacity(weights.len());
    for (mu, w) in weights {
        let y = node_coordinates(mu, dim);
        terms.push((*w, f.eval(&y)?));
    }
    Ok(weighted_pairwise_sum(&terms))
}

/// Tensor-product quadrature `Q_nu f` against the uniform probability
/// measure; dimensions outside the support of `nu` are evaluated at the
/// anchor `chi_0`.
pub fn tensor_quadrature<V: ValueSpace, F: ParametricFunction<V>>(
    nu: &MultiIndex,
    dim: usize,
    f: &F,
) -> Result<V, UqError> {
    let tables: Vec<(usize, std::sync::Arc<Vec<f64>>)> = nu
        .support()
        .map(|(d, v)| (d, quad_weights_1d(v as usize)))
        .collect();
    let mut weights: Vec<(MultiIndex, f64)> = Vec::new();
    for_each_leq(nu, |mu| {
        let mut w = 1.0;
        for (d, table) in &tables {
            w *= table[mu.get(*d) as usize];
        }
        weights.push((mu, w));
    });
    weights.sort_by(|a, b| a.0.cmp(&b.0));
    apply_weights(&weights, dim, f).map(|v| v.expect("tensor rule has at least one node"))
}

/// Smolyak quadrature `Q_set f`; exact on the span of the monomials indexed
/// by the (downward-closed) set.
pub fn smolyak_quadrature<V: ValueSpace, F: ParametricFunction<V>>(
    set: &IndexSet,
    dim: usize,
    f: &F,
) -> Result<V, UqError> {
    let weights = combined_quad_weights(set)?;
    if weights.is_empty() {
        return Err(UqError::InvalidParameter(
            "smolyak quadrature over an empty index set".into(),
        ));
    }
    apply_weights(&weights, dim, f).map(|v| v.expect("nonempty"))
}

/// Smolyak interpolation `(I_set f)(y)`.
pub fn smolyak_interpolate<V: ValueSpace, F: ParametricFunction<V>>(
    set: &IndexSet,
    dim: usize,
    f: &F,
    y: &[f64],
) -> Result<V, UqError> {
    let weights = combined_interp_weights(set, y)?;
    if weights.is_empty() {
        return Err(UqError::InvalidParameter(
            "smolyak interpolation over an empty index set".into(),
        ));
    }
    apply_weights(&weights, dim, f).map(|v| v.expect("nonempty"))
}
