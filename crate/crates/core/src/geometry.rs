//! Affine-parametric domain transformations on the computational square
//! `[-1, 1]^2` and the pullback of the cavity coefficients.
//!
//! The mode family displaces points vertically,
//! `sigma(y)(x) = x + Theta * sum_j y_j j^(-rho-1) x_2 sin(2 pi j x_1) e_2`,
//! so the Jacobian is lower triangular with
//! `det = 1 + Theta * sum_j y_j j^(-rho-1) sin(2 pi j x_1)`.
//!
//! In two dimensions the covariant pullback turns the curl-curl coefficient
//! into the scalar `(det dT)^-1 (mu^-1 o T)`, while the permittivity and the
//! current transform as `det(dT) dT^-1 (eps o T) dT^-T` and
//! `det(dT) dT^-1 (J o T)`; the change-of-variables tests in this module and
//! the assembly-equivalence test in the FEM layer pin these formulas down.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::UqError;

/// The affine-parametric transformation family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParametricMap {
    /// Scale parameter, in (0, 1/2) for guaranteed admissibility.
    pub theta: f64,
    /// Decay exponent of the mode amplitudes, > 1.
    pub rho: f64,
    /// Truncation dimension of the parameter sequence.
    pub n_modes: usize,
}

impl Default for ParametricMap {
    fn default() -> Self {
        Self {
            theta: 0.25,
            rho: 3.0,
            n_modes: 50,
        }
    }
}

impl ParametricMap {
    /// Amplitude `j^(-rho-1)` of mode `j` (1-based).
    pub fn amplitude(&self, j: usize) -> f64 {
        (j as f64).powf(-self.rho - 1.0)
    }

    /// Per-dimension weights for the a-priori index sets, proportional to
    /// the Lipschitz size `Theta j^-rho` of the modes (the `j` from the
    /// sine derivative cancels one power of the amplitude decay).
    pub fn smolyak_weights(&self, scale: f64) -> Vec<f64> {
        (1..=self.n_modes)
            .map(|j| (scale * self.theta * (j as f64).powf(-self.rho)).min(0.9))
            .collect()
    }

    /// The realized transformation at a parameter point; coordinates of `y`
    /// beyond `n_modes` are ignored.
    pub fn sigma(&self, y: &[f64]) -> DomainTransform {
        DomainTransform {
            map: self.clone(),
            y: y.iter().copied().take(self.n_modes).collect(),
        }
    }

    /// Sampled extrema of `det(d sigma(y))` on a `res x res` tensor grid.
    pub fn jacobian_det_bounds(&self, y: &[f64], res: usize) -> DetBounds {
        let t = self.sigma(y);
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..=res {
            let x1 = -1.0 + 2.0 * i as f64 / res as f64;
            for j in 0..=res {
                let x2 = -1.0 + 2.0 * j as f64 / res as f64;
                let det = t.det([x1, x2]);
                min = min.min(det);
                max = max.max(det);
            }
        }
        DetBounds { min, max }
    }

    /// Pullback of the material fields under `sigma(y)`; fails when the map
    /// is inadmissible (sampled `det <= 0`). The determinant of this family
    /// is `1 + d(x_1)`, so a fine 1D scan certifies admissibility.
    pub fn pullback_coefficients(
        &self,
        y: &[f64],
        materials: Materials,
    ) -> Result<PulledBackCoefficients, UqError> {
        let transform = self.sigma(y);
        let mut min = f64::INFINITY;
        for i in 0..=2048 {
            let x1 = -1.0 + 2.0 * i as f64 / 2048.0;
            min = min.min(transform.det([x1, 0.0]));
        }
        if min <= 0.0 {
            return Err(UqError::InadmissibleMap { min_det: min });
        }
        Ok(PulledBackCoefficients {
            transform,
            materials,
        })
    }
}

/// Extrema of the Jacobian determinant over the computational domain.
#[derive(Clone, Copy, Debug)]
pub struct DetBounds {
    pub min: f64,
    pub max: f64,
}

impl DetBounds {
    pub fn admissible(&self) -> bool {
        self.min > 0.0
    }
}

/// A realized transformation `sigma(y)`, evaluable with value and Jacobian.
#[derive(Clone, Debug)]
pub struct DomainTransform {
    map: ParametricMap,
    y: Vec<f64>,
}

impl DomainTransform {
    /// `d(x_1) = Theta * sum_j y_j j^(-rho-1) sin(2 pi j x_1)` and its
    /// `x_1`-derivative.
    fn profile(&self, x1: f64) -> (f64, f64) {
        let mut d = 0.0;
        let mut dd = 0.0;
        for (idx, &yj) in self.y.iter().enumerate() {
            let j = (idx + 1) as f64;
            let amp = self.map.amplitude(idx + 1);
            let phase = 2.0 * PI * j * x1;
            d += yj * amp * phase.sin();
            dd += yj * amp * 2.0 * PI * j * phase.cos();
        }
        (self.map.theta * d, self.map.theta * dd)
    }

    /// Image of `x`.
    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        let (d, _) = self.profile(x[0]);
        [x[0], x[1] * (1.0 + d)]
    }

    /// Jacobian matrix at `x` (analytic).
    pub fn jacobian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let (d, dd) = self.profile(x[0]);
        [[1.0, 0.0], [x[1] * dd, 1.0 + d]]
    }

    /// `det(d sigma)` at `x`; closed form `1 + d(x_1)`.
    pub fn det(&self, x: [f64; 2]) -> f64 {
        let (d, _) = self.profile(x[0]);
        1.0 + d
    }
}

/// A bivariate polynomial field of degree <= 2 with two complex components,
/// in the monomial basis `[1, x1, x2, x1^2, x1 x2, x2^2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyField2 {
    pub coeffs: [[Complex64; 6]; 2],
}

impl PolyField2 {
    pub fn zero() -> Self {
        Self {
            coeffs: [[Complex64::new(0.0, 0.0); 6]; 2],
        }
    }

    /// Constant field.
    pub fn constant(c0: Complex64, c1: Complex64) -> Self {
        let mut f = Self::zero();
        f.coeffs[0][0] = c0;
        f.coeffs[1][0] = c1;
        f
    }

    pub fn eval(&self, x: [f64; 2]) -> [Complex64; 2] {
        let basis = [1.0, x[0], x[1], x[0] * x[0], x[0] * x[1], x[1] * x[1]];
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for comp in 0..2 {
            for (b, c) in basis.iter().zip(&self.coeffs[comp]) {
                out[comp] += b * c;
            }
        }
        out
    }

    /// Polynomial degree of the field (0, 1 or 2).
    pub fn degree(&self) -> usize {
        let z = Complex64::new(0.0, 0.0);
        let nonzero = |r: std::ops::Range<usize>| {
            self.coeffs.iter().any(|c| c[r.clone()].iter().any(|v| *v != z))
        };
        if nonzero(3..6) {
            2
        } else if nonzero(1..3) {
            1
        } else {
            0
        }
    }
}

/// Material data on the hold-all domain `[-2, 2]^2`: scalar factors of the
/// identity for the permeability and permittivity, and a polynomial current.
#[derive(Clone, Debug)]
pub struct Materials {
    pub mu: Complex64,
    pub eps: Complex64,
    pub current: PolyField2,
}

impl Default for Materials {
    /// Lossy defaults: `mu = 1`, `eps = 1 + 0.5i`, a fixed degree-1 current.
    fn default() -> Self {
        let mut current = PolyField2::zero();
        current.coeffs[0][0] = Complex64::new(1.0, 0.0);
        current.coeffs[0][2] = Complex64::new(0.5, 0.0); // + 0.5 x2
        current.coeffs[1][0] = Complex64::new(0.5, 0.0);
        current.coeffs[1][1] = Complex64::new(-0.5, 0.0); // - 0.5 x1
        Self {
            mu: Complex64::new(1.0, 0.0),
            eps: Complex64::new(1.0, 0.5),
            current,
        }
    }
}

/// Coefficient fields of the pulled-back variational problem, evaluable at
/// arbitrary quadrature points of the computational domain.
#[derive(Clone, Debug)]
pub struct PulledBackCoefficients {
    pub transform: DomainTransform,
    pub materials: Materials,
}

impl PulledBackCoefficients {
    /// Scalar curl-curl coefficient `(det dT)^-1 (mu^-1 o T)`.
    pub fn inv_mu(&self, x: [f64; 2]) -> Complex64 {
        let det = self.transform.det(x);
        self.materials.mu.inv() / det
    }

    /// Matrix coefficient `det(dT) dT^-1 (eps o T) dT^-T`.
    pub fn eps_matrix(&self, x: [f64; 2]) -> [[Complex64; 2]; 2] {
        let jac = self.transform.jacobian(x);
        let a = jac[1][0];
        let dd = jac[1][1]; // det
        let eps = self.materials.eps;
        // det * dT^-1 dT^-T for dT = [[1, 0], [a, dd]]
        [
            [eps * dd, eps * -a],
            [eps * -a, eps * ((a * a + 1.0) / dd)],
        ]
    }

    /// Vector coefficient `det(dT) dT^-1 (J o T)`.
    pub fn current(&self, x: [f64; 2]) -> [Complex64; 2] {
        let jac = self.transform.jacobian(x);
        let a = jac[1][0];
        let dd = jac[1][1];
        let j_phys = self.materials.current.eval(self.transform.apply(x));
        [dd * j_phys[0], -a * j_phys[0] + j_phys[1]]
    }
}
