//! Manufactured cavity solution for convergence verification.
//!
//! On the nominal square with `mu = eps = 1`, `omega = 1` and the identity
//! map, the field `E = (1 - x2^2, 0)` has vanishing tangential trace,
//! `curl E = 2 x2`, `curl curl E = (2, 0)` and therefore satisfies the cavity
//! equation with current `J = i (1 + x2^2, 0)`.

use num_complex::Complex64;

use crate::fem::assemble::{assemble, hcurl_error_vs_exact, qoi, solve, CoefficientFields};
use crate::fem::mesh::EdgeSpace;
use crate::fem::quadrature::{QuadraturePair, TriangleRule};
use crate::UqError;

pub struct ManufacturedCavity;

impl ManufacturedCavity {
    pub fn exact(x: [f64; 2]) -> [Complex64; 2] {
        [
            Complex64::new(1.0 - x[1] * x[1], 0.0),
            Complex64::new(0.0, 0.0),
        ]
    }

    pub fn exact_curl(x: [f64; 2]) -> Complex64 {
        Complex64::new(2.0 * x[1], 0.0)
    }

    pub fn current(x: [f64; 2]) -> [Complex64; 2] {
        [
            Complex64::new(0.0, 1.0 + x[1] * x[1]),
            Complex64::new(0.0, 0.0),
        ]
    }

    pub fn coefficient_fields() -> CoefficientFields<'static> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        CoefficientFields {
            inv_mu: Box::new(move |_| one),
            eps: Box::new(move |_| [[one, zero], [zero, one]]),
            current: Box::new(Self::current),
        }
    }

    /// Discrete solution on a given space.
    pub fn solve_on(space: &EdgeSpace) -> Result<Vec<Complex64>, UqError> {
        let fields = Self::coefficient_fields();
        let (matrix, rhs) = assemble(space, &fields, &QuadraturePair::default(), 1.0)?;
        solve(&matrix, &rhs, space.level)
    }

    /// H(curl) error of the discrete solution against the exact field.
    pub fn hcurl_error(space: &EdgeSpace, coeffs: &[Complex64]) -> f64 {
        hcurl_error_vs_exact(space, coeffs, &Self::exact, &Self::exact_curl)
    }

    /// Quantity-of-interest error against the exact `G(E)` for a weight `g`.
    pub fn qoi_error(
        space: &EdgeSpace,
        coeffs: &[Complex64],
        weight: &dyn Fn([f64; 2]) -> [Complex64; 2],
    ) -> f64 {
        let discrete = qoi(space, coeffs, weight, &TriangleRule::degree3());
        let exact = Self::exact_qoi(weight);
        (discrete - exact).norm()
    }

    /// `G(E)` for the exact manufactured field by high-order quadrature.
    pub fn exact_qoi(weight: &dyn Fn([f64; 2]) -> [Complex64; 2]) -> Complex64 {
        let (gx, gw) = crate::leja::gauss_legendre(10);
        let mut total = Complex64::new(0.0, 0.0);
        for (x1, w1) in gx.iter().zip(&gw) {
            for (x2, w2) in gx.iter().zip(&gw) {
                let x = [*x1, *x2];
                let g = weight(x);
                let e = Self::exact(x);
                total += w1 * w2 * (g[0] * e[0].conj() + g[1] * e[1].conj());
            }
        }
        total
    }
}
