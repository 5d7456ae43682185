//! Value spaces for parametric functions.
//!
//! Estimators and sparse-grid operators are generic over the value they
//! accumulate: a scalar quantity of interest or a full DoF vector. Both only
//! need real-weighted linear combinations and a norm.

use num_complex::Complex64;

/// A normed vector space over the reals, as needed by quadrature and
/// estimator accumulation.
pub trait ValueSpace: Clone {
    /// `self += c * other`. Shapes must match.
    fn add_scaled(&mut self, c: f64, other: &Self);

    /// `self *= c`.
    fn scale_in_place(&mut self, c: f64);

    /// `self - other`.
    fn sub(&self, other: &Self) -> Self;

    /// A zero value of the same shape.
    fn zeroed(&self) -> Self;

    /// Euclidean norm.
    fn norm(&self) -> f64;
}

impl ValueSpace for Complex64 {
    fn add_scaled(&mut self, c: f64, other: &Self) {
        *self += c * other;
    }

    fn scale_in_place(&mut self, c: f64) {
        *self *= c;
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn zeroed(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

impl ValueSpace for Vec<Complex64> {
    fn add_scaled(&mut self, c: f64, other: &Self) {
        assert_eq!(self.len(), other.len(), "value dimension mismatch");
        for (a, b) in self.iter_mut().zip(other) {
            *a += c * b;
        }
    }

    fn scale_in_place(&mut self, c: f64) {
        for a in self.iter_mut() {
            *a *= c;
        }
    }

    fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "value dimension mismatch");
        self.iter().zip(other).map(|(a, b)| a - b).collect()
    }

    fn zeroed(&self) -> Self {
        vec![Complex64::new(0.0, 0.0); self.len()]
    }

    fn norm(&self) -> f64 {
        self.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Weighted sum with a fixed pairwise reduction tree.
///
/// The tree depends only on the slice length, so the result is bitwise
/// reproducible regardless of how the terms were produced. Returns `None`
/// for an empty slice (the zero shape is unknown).
pub fn weighted_pairwise_sum<V: ValueSpace>(terms: &[(f64, V)]) -> Option<V> {
    fn go<V: ValueSpace>(terms: &[(f64, V)]) -> V {
        if terms.len() <= 4 {
            let mut acc = terms[0].1.zeroed();
            for (c, v) in terms {
                acc.add_scaled(*c, v);
            }
            acc
        } else {
            let mid = terms.len() / 2;
            let mut left = go(&terms[..mid]);
            left.add_scaled(1.0, &go(&terms[mid..]));
            left
        }
    }
    if terms.is_empty() {
        None
    } else {
        Some(go(terms))
    }
}

/// Pairwise sum of unweighted values; `None` for an empty slice.
pub fn pairwise_sum<V: ValueSpace>(values: &[V]) -> Option<V> {
    fn go<V: ValueSpace>(values: &[V]) -> V {
        if values.len() <= 4 {
            let mut acc = values[0].clone();
            for v in &values[1..] {
                acc.add_scaled(1.0, v);
            }
            acc
        } else {
            let mid = values.len() / 2;
            let mut left = go(&values[..mid]);
            left.add_scaled(1.0, &go(&values[mid..]));
            left
        }
    }
    if values.is_empty() {
        None
    } else {
        Some(go(values))
    }
}
