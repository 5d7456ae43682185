//! Quadrature-based assembly of the lossy-cavity sesquilinear form, the
//! direct solve, the quantity of interest and error norms.
//!
//! The assembled form is
//! `a_h(u, v) = sum_K Q1_K(inv_mu curl u curl v) - omega^2 Q2_K((eps u) . v)`
//! with right side `f_h(v) = -i omega sum_K Q2_K(j . v)`; boundary (PEC)
//! degrees of freedom are eliminated before assembly. The basis is real, so
//! the matrix is complex symmetric; a banded LU with partial pivoting, a
//! residual check and one step of iterative refinement handle the solve.

use num_complex::Complex64;

use crate::error::UqError;
use crate::fem::band::BandMatrix;
use crate::fem::mesh::EdgeSpace;
use crate::fem::quadrature::{QuadraturePair, TriangleRule};
use crate::geometry::{Materials, PulledBackCoefficients};

const RESIDUAL_TOL: f64 = 1e-10;

/// Coefficient fields of the variational problem, evaluable at arbitrary
/// points of the meshed domain.
pub struct CoefficientFields<'a> {
    pub inv_mu: Box<dyn Fn([f64; 2]) -> Complex64 + 'a>,
    pub eps: Box<dyn Fn([f64; 2]) -> [[Complex64; 2]; 2] + 'a>,
    pub current: Box<dyn Fn([f64; 2]) -> [Complex64; 2] + 'a>,
}

impl<'a> CoefficientFields<'a> {
    /// Physical (identity-map) fields from scalar materials.
    pub fn from_materials(materials: &'a Materials) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            inv_mu: Box::new(move |_| materials.mu.inv()),
            eps: Box::new(move |_| [[materials.eps, zero], [zero, materials.eps]]),
            current: Box::new(move |x| materials.current.eval(x)),
        }
    }

    /// Fields of the pulled-back problem under a realized domain map.
    pub fn from_pullback(pb: &'a PulledBackCoefficients) -> Self {
        Self {
            inv_mu: Box::new(move |x| pb.inv_mu(x)),
            eps: Box::new(move |x| pb.eps_matrix(x)),
            current: Box::new(move |x| pb.current(x)),
        }
    }
}

/// Assemble the banded system and right side on an edge space.
pub fn assemble(
    space: &EdgeSpace,
    fields: &CoefficientFields,
    pair: &QuadraturePair,
    omega: f64,
) -> Result<(BandMatrix, Vec<Complex64>), UqError> {
    pair.validate(1, 1)?;
    let mesh = &space.mesh;
    // bandwidth of the eliminated system
    let mut bw = 0usize;
    for te in &mesh.tri_edges {
        for a in 0..3 {
            for b in 0..3 {
                if let (Some(da), Some(db)) = (
                    space.dof_of_edge[te[a].0],
                    space.dof_of_edge[te[b].0],
                ) {
                    bw = bw.max(da.abs_diff(db));
                }
            }
        }
    }
    let mut matrix = BandMatrix::new(space.dim, bw, bw);
    let mut rhs = vec![Complex64::new(0.0, 0.0); space.dim];
    let scale_rhs = Complex64::new(0.0, -omega); // -i omega

    for t in 0..mesh.triangles.len() {
        let geom = mesh.geometry(t);
        let dofs: Vec<(usize, Option<usize>, f64)> = (0..3)
            .map(|k| {
                let (edge, sign) = mesh.tri_edges[t][k];
                (k, space.dof_of_edge[edge], sign)
            })
            .collect();

        // curl-curl part: curls are constant per element, the rule only
        // averages the coefficient
        let curls: Vec<f64> = (0..3).map(|k| geom.whitney_curl(k)).collect();
        let mut inv_mu_avg = Complex64::new(0.0, 0.0);
        for (b, w) in pair.q1.bary.iter().zip(&pair.q1.weights) {
            inv_mu_avg += w * (fields.inv_mu)(geom.point(*b));
        }
        for &(ka, da, sa) in &dofs {
            let Some(da) = da else { continue };
            for &(kb, db, sb) in &dofs {
                let Some(db) = db else { continue };
                let val = inv_mu_avg * (geom.area * sa * sb * curls[ka] * curls[kb]);
                matrix.add(da, db, val);
            }
        }

        // mass part and right side under Q2
        for (b, w) in pair.q2.bary.iter().zip(&pair.q2.weights) {
            let x = geom.point(*b);
            let eps = (fields.eps)(x);
            let j = (fields.current)(x);
            let wk: Vec<[f64; 2]> = (0..3).map(|k| geom.whitney(k, *b)).collect();
            for &(ka, da, sa) in &dofs {
                let Some(da) = da else { continue };
                let wa = [sa * wk[ka][0], sa * wk[ka][1]];
                // (eps w_a) . w_b
                let ea = [
                    eps[0][0] * wa[0] + eps[0][1] * wa[1],
                    eps[1][0] * wa[0] + eps[1][1] * wa[1],
                ];
                for &(kb, db, sb) in &dofs {
                    let Some(db) = db else { continue };
                    let wb = [sb * wk[kb][0], sb * wk[kb][1]];
                    let val = (ea[0] * wb[0] + ea[1] * wb[1])
                        * (-omega * omega * w * geom.area);
                    matrix.add(da, db, val);
                }
                rhs[da] += scale_rhs * (w * geom.area) * (j[0] * wa[0] + j[1] * wa[1]);
            }
        }
    }
    Ok((matrix, rhs))
}

/// Direct banded solve with residual verification (`|Ax - b| <= 1e-10 |b|`)
/// and one step of iterative refinement.
pub fn solve(matrix: &BandMatrix, rhs: &[Complex64], level: usize) -> Result<Vec<Complex64>, UqError> {
    let lu = matrix.clone().factor().map_err(|e| match e {
        UqError::SolverFailure { detail, .. } => UqError::SolverFailure { level, detail },
        other => other,
    })?;
    let norm_b = rhs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut x = rhs.to_vec();
    lu.solve(&mut x);
    if norm_b == 0.0 {
        return Ok(x);
    }
    for _ in 0..2 {
        let ax = matrix.matvec(&x);
        let mut res: Vec<Complex64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let norm_r = res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_r <= RESIDUAL_TOL * norm_b {
            return Ok(x);
        }
        lu.solve(&mut res);
        for (xi, di) in x.iter_mut().zip(&res) {
            *xi += di;
        }
    }
    let ax = matrix.matvec(&x);
    let norm_r = ax
        .iter()
        .zip(rhs)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if norm_r <= RESIDUAL_TOL * norm_b {
        Ok(x)
    } else {
        Err(UqError::SolverFailure {
            level,
            detail: format!("residual {:.3e} exceeds {:.1e} of |rhs|", norm_r / norm_b, RESIDUAL_TOL),
        })
    }
}

/// Antilinear quantity of interest `G(u) = int g . conj(u)` of a discrete
/// solution, integrated element by element with the given rule. With a
/// polynomial weight of degree <= 2 and the degree-3 rule the integration is
/// exact.
pub fn qoi(
    space: &EdgeSpace,
    coeffs: &[Complex64],
    weight: &dyn Fn([f64; 2]) -> [Complex64; 2],
    rule: &TriangleRule,
) -> Complex64 {
    let mesh = &space.mesh;
    let mut total = Complex64::new(0.0, 0.0);
    for t in 0..mesh.triangles.len() {
        let geom = mesh.geometry(t);
        let mut local = Complex64::new(0.0, 0.0);
        for (b, w) in rule.bary.iter().zip(&rule.weights) {
            let x = geom.point(*b);
            let g = weight(x);
            let u = space.eval_field_in(coeffs, t, x);
            local += w * (g[0] * u[0].conj() + g[1] * u[1].conj());
        }
        total += geom.area * local;
    }
    total
}

/// H(curl) norm of the difference between a discrete field and a reference
/// field given by closures (value and scalar curl), with a degree-4 rule.
pub fn hcurl_error_vs_exact(
    space: &EdgeSpace,
    coeffs: &[Complex64],
    exact: &dyn Fn([f64; 2]) -> [Complex64; 2],
    exact_curl: &dyn Fn([f64; 2]) -> Complex64,
) -> f64 {
    let rule = TriangleRule::degree4();
    let mesh = &space.mesh;
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        let geom = mesh.geometry(t);
        let curl_h = space.eval_curl_in(coeffs, t);
        let mut local = 0.0;
        for (b, w) in rule.bary.iter().zip(&rule.weights) {
            let x = geom.point(*b);
            let u = space.eval_field_in(coeffs, t, x);
            let v = exact(x);
            let dc = curl_h - exact_curl(x);
            local += w
                * ((u[0] - v[0]).norm_sqr() + (u[1] - v[1]).norm_sqr() + dc.norm_sqr());
        }
        total += geom.area * local;
    }
    total.sqrt()
}

/// H(curl) distance between a fine discrete field and a coarser one
/// (evaluable anywhere on the structured meshes).
pub fn hcurl_error_vs_discrete(
    fine: &EdgeSpace,
    fine_coeffs: &[Complex64],
    other: &EdgeSpace,
    other_coeffs: &[Complex64],
) -> f64 {
    hcurl_error_vs_exact(
        fine,
        fine_coeffs,
        &|x| other.eval_field(other_coeffs, x),
        &|x| other.eval_curl_in(other_coeffs, other.locate(x)),
    )
}

/// Discrete H(curl) norm of a solution.
pub fn hcurl_norm(space: &EdgeSpace, coeffs: &[Complex64]) -> f64 {
    let zero = |_: [f64; 2]| [Complex64::new(0.0, 0.0); 2];
    let zero_curl = |_: [f64; 2]| Complex64::new(0.0, 0.0);
    hcurl_error_vs_exact(space, coeffs, &zero, &zero_curl)
}

/// Smallest eigenvalue of the Hermitian part of `e^{i theta} A`, through the
/// real symmetric embedding `[[X, -Y], [Y, X]]` and cyclic Jacobi iteration.
pub fn rotated_hermitian_min_eig(dense: &[Vec<Complex64>], theta: f64) -> f64 {
    let n = dense.len();
    let phase = Complex64::from_polar(1.0, theta);
    // Hermitian part H = (B + B^H) / 2 of B = e^{i theta} A
    let mut h = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            h[i][j] = 0.5 * (phase * dense[i][j] + (phase * dense[j][i]).conj());
        }
    }
    let mut m = vec![vec![0.0f64; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = h[i][j].re;
            m[i][j + n] = -h[i][j].im;
            m[i + n][j] = h[i][j].im;
            m[i + n][j + n] = h[i][j].re;
        }
    }
    symmetric_min_eig(&mut m)
}

/// Smallest eigenvalue of a real symmetric matrix by cyclic Jacobi sweeps.
fn symmetric_min_eig(m: &mut [Vec<f64>]) -> f64 {
    let n = m.len();
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p][q] * m[p][q];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let tau = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).fold(f64::INFINITY, f64::min)
}

/// 1D search for the rotation angle maximizing the smallest eigenvalue of
/// the Hermitian part of `e^{i theta} A`.
pub fn best_rotation(dense: &[Vec<Complex64>]) -> (f64, f64) {
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..360 {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / 360.0;
        let alpha = rotated_hermitian_min_eig(dense, theta);
        if alpha > best.1 {
            best = (theta, alpha);
        }
    }
    best
}
