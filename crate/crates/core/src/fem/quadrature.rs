//! Reference-triangle quadrature rules in barycentric coordinates.
//!
//! Weights sum to one; a rule applied to an element is scaled by the element
//! area, matching the transformed-rule convention of affine meshes.

use crate::error::UqError;

/// A rule on the reference triangle: barycentric nodes and weights summing
/// to one, exact on polynomials up to `degree`.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub bary: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// Centroid rule, exact on degree 1.
    pub fn centroid() -> Self {
        Self {
            bary: vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![1.0],
            degree: 1,
        }
    }

    /// Edge-midpoint rule (3 points), exact on degree 2. The shipped default
    /// for assembling both forms.
    pub fn edge_midpoints() -> Self {
        Self {
            bary: vec![
                [0.5, 0.5, 0.0],
                [0.0, 0.5, 0.5],
                [0.5, 0.0, 0.5],
            ],
            weights: vec![1.0 / 3.0; 3],
            degree: 2,
        }
    }

    /// Classic 4-point rule, exact on degree 3; used for exact integration of
    /// the quantity-of-interest density.
    pub fn degree3() -> Self {
        Self {
            bary: vec![
                [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
                [0.6, 0.2, 0.2],
                [0.2, 0.6, 0.2],
                [0.2, 0.2, 0.6],
            ],
            weights: vec![-27.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0],
            degree: 3,
        }
    }

    /// Dunavant 6-point rule, exact on degree 4; used for error norms.
    pub fn degree4() -> Self {
        let a1 = 0.445948490915965;
        let w1 = 0.223381589678011;
        let a2 = 0.091576213509771;
        let w2 = 0.109951743655322;
        Self {
            bary: vec![
                [1.0 - 2.0 * a1, a1, a1],
                [a1, 1.0 - 2.0 * a1, a1],
                [a1, a1, 1.0 - 2.0 * a1],
                [1.0 - 2.0 * a2, a2, a2],
                [a2, 1.0 - 2.0 * a2, a2],
                [a2, a2, 1.0 - 2.0 * a2],
            ],
            weights: vec![w1, w1, w1, w2, w2, w2],
            degree: 4,
        }
    }

    /// 7-point rule, exact on degree 5.
    pub fn degree5() -> Self {
        let a1 = 0.470142064105115;
        let w1 = 0.132394152788506;
        let a2 = 0.101286507323456;
        let w2 = 0.125939180544827;
        Self {
            bary: vec![
                [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
                [1.0 - 2.0 * a1, a1, a1],
                [a1, 1.0 - 2.0 * a1, a1],
                [a1, a1, 1.0 - 2.0 * a1],
                [1.0 - 2.0 * a2, a2, a2],
                [a2, 1.0 - 2.0 * a2, a2],
                [a2, a2, 1.0 - 2.0 * a2],
            ],
            weights: vec![0.225, w1, w1, w1, w2, w2, w2],
            degree: 5,
        }
    }
}

/// The pair of rules assembling the curl-curl and mass/right-hand-side terms.
#[derive(Clone, Debug)]
pub struct QuadraturePair {
    pub q1: TriangleRule,
    pub q2: TriangleRule,
}

impl Default for QuadraturePair {
    fn default() -> Self {
        Self {
            q1: TriangleRule::edge_midpoints(),
            q2: TriangleRule::edge_midpoints(),
        }
    }
}

impl QuadraturePair {
    /// Exactness requirements for order-`k` elements with data regularity
    /// `n_reg`: `q1` on degree `k + n_reg - 2`, `q2` on degree `k + n_reg - 1`.
    pub fn validate(&self, k: usize, n_reg: usize) -> Result<(), UqError> {
        let need1 = (k + n_reg).saturating_sub(2);
        if self.q1.degree < need1 {
            return Err(UqError::QuadratureTooWeak {
                which: "Q1",
                required: need1,
                got: self.q1.degree,
            });
        }
        let need2 = (k + n_reg).saturating_sub(1);
        if self.q2.degree < need2 {
            return Err(UqError::QuadratureTooWeak {
                which: "Q2",
                required: need2,
                got: self.q2.degree,
            });
        }
        Ok(())
    }
}
