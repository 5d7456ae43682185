//! Cross-module FEM checks: pullback equivalence on matched meshes, uniform
//! discrete coercivity and a-priori bounds over random admissible parameters,
//! and error-norm sanity.

use num_complex::Complex64;
use shape_uq_core::fem::{
    assemble, best_rotation, hcurl_error_vs_discrete, hcurl_norm, qoi,
    rotated_hermitian_min_eig, solve, CoefficientFields, EdgeSpace, ManufacturedCavity,
    QuadraturePair, TriangleRule,
};
use shape_uq_core::geometry::{Materials, ParametricMap};
use shape_uq_core::mlmc::RandomStream;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Default quantity-of-interest weight `g = (1 - x2^2, x1 x2)`.
fn weight_g(x: [f64; 2]) -> [Complex64; 2] {
    [c(1.0 - x[1] * x[1], 0.0), c(x[0] * x[1], 0.0)]
}

/// Coefficient fields of the pullback under an affine map `x -> m x + shift`:
/// `inv_mu = mu^-1 / det`, `eps_T = det m^-1 eps m^-T`, `j_T = det m^-1 J(T x)`.
fn affine_pullback_fields<'a>(
    m: [[f64; 2]; 2],
    shift: [f64; 2],
    materials: &'a Materials,
) -> CoefficientFields<'a> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let minv = [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ];
    // det * m^-1 m^-T (symmetric)
    let mm = [
        [
            det * (minv[0][0] * minv[0][0] + minv[0][1] * minv[0][1]),
            det * (minv[0][0] * minv[1][0] + minv[0][1] * minv[1][1]),
        ],
        [
            det * (minv[1][0] * minv[0][0] + minv[1][1] * minv[0][1]),
            det * (minv[1][0] * minv[1][0] + minv[1][1] * minv[1][1]),
        ],
    ];
    let apply = move |x: [f64; 2]| {
        [
            m[0][0] * x[0] + m[0][1] * x[1] + shift[0],
            m[1][0] * x[0] + m[1][1] * x[1] + shift[1],
        ]
    };
    CoefficientFields {
        inv_mu: Box::new(move |_| materials.mu.inv() / det),
        eps: Box::new(move |_| {
            [
                [materials.eps * mm[0][0], materials.eps * mm[0][1]],
                [materials.eps * mm[1][0], materials.eps * mm[1][1]],
            ]
        }),
        current: Box::new(move |x| {
            let j = materials.current.eval(apply(x));
            [
                det * (minv[0][0] * j[0] + minv[0][1] * j[1]),
                det * (minv[1][0] * j[0] + minv[1][1] * j[1]),
            ]
        }),
    }
}

#[test]
fn affine_pullback_equivalence_in_qoi() {
    let m = [[1.0, 0.12], [0.08, 1.1]];
    let shift = [0.05, -0.03];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let minv = [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ];
    let materials = Materials::default();
    let omega = 1.0;
    let pair = QuadraturePair::default();

    // route (i): solve on the mapped mesh with the physical coefficients
    let computational = EdgeSpace::structured_level(3);
    let mapped = EdgeSpace::from_mesh(computational.mesh.mapped_affine(m, shift));
    let fields_phys = CoefficientFields::from_materials(&materials);
    let (a1, f1) = assemble(&mapped, &fields_phys, &pair, omega).unwrap();
    let sol_mapped = solve(&a1, &f1, 3).unwrap();
    let qoi_mapped = qoi(&mapped, &sol_mapped, &weight_g, &TriangleRule::degree3());

    // route (ii): solve on the computational mesh with pulled-back
    // coefficients; the QoI weight pulls back like the current
    let fields_pb = affine_pullback_fields(m, shift, &materials);
    let (a2, f2) = assemble(&computational, &fields_pb, &pair, omega).unwrap();
    let sol_pb = solve(&a2, &f2, 3).unwrap();
    let apply = |x: [f64; 2]| {
        [
            m[0][0] * x[0] + m[0][1] * x[1] + shift[0],
            m[1][0] * x[0] + m[1][1] * x[1] + shift[1],
        ]
    };
    let weight_pb = move |x: [f64; 2]| {
        let g = weight_g(apply(x));
        [
            det * (minv[0][0] * g[0] + minv[0][1] * g[1]),
            det * (minv[1][0] * g[0] + minv[1][1] * g[1]),
        ]
    };
    let qoi_pb = qoi(&computational, &sol_pb, &weight_pb, &TriangleRule::degree3());

    assert!(
        (qoi_mapped - qoi_pb).norm() < 1e-10,
        "mapped {qoi_mapped} vs pulled back {qoi_pb}"
    );
}

#[test]
fn discrete_coercivity_uniform_over_parameters() {
    let map = ParametricMap {
        theta: 0.25,
        rho: 2.0,
        n_modes: 8,
    };
    let materials = Materials::default();
    let space = EdgeSpace::structured_level(1);
    let pair = QuadraturePair::default();

    // rotation fixed by a 1D search at the nominal parameter
    let pb0 = map.pullback_coefficients(&[0.0; 8], materials.clone()).unwrap();
    let fields0 = CoefficientFields::from_pullback(&pb0);
    let (a0, _) = assemble(&space, &fields0, &pair, 1.0).unwrap();
    let (theta, alpha0) = best_rotation(&a0.to_dense());
    assert!(alpha0 > 0.05, "nominal coercivity {alpha0}");

    let stream = RandomStream::new(41);
    let mut worst = f64::INFINITY;
    for sample in 0..20u64 {
        let y = stream.point(0, sample, 8);
        let pb = map.pullback_coefficients(&y, materials.clone()).unwrap();
        let fields = CoefficientFields::from_pullback(&pb);
        let (a, _) = assemble(&space, &fields, &pair, 1.0).unwrap();
        let alpha = rotated_hermitian_min_eig(&a.to_dense(), theta);
        worst = worst.min(alpha);
    }
    assert!(
        worst > 0.02,
        "rotated Hermitian part lost definiteness: min eig {worst}"
    );
}

#[test]
fn apriori_bound_uniform_over_parameters() {
    let map = ParametricMap {
        theta: 0.25,
        rho: 2.0,
        n_modes: 8,
    };
    let materials = Materials::default();
    let space = EdgeSpace::structured_level(2);
    let pair = QuadraturePair::default();
    let stream = RandomStream::new(17);
    let mut largest = 0.0f64;
    for sample in 0..20u64 {
        let y = stream.point(0, sample, 8);
        let pb = map.pullback_coefficients(&y, materials.clone()).unwrap();
        let fields = CoefficientFields::from_pullback(&pb);
        let (a, f) = assemble(&space, &fields, &pair, 1.0).unwrap();
        let sol = solve(&a, &f, 2).unwrap();
        largest = largest.max(hcurl_norm(&space, &sol));
    }
    // omega/alpha * |J| at this data is O(10); 25 leaves headroom without
    // admitting blowup
    assert!(largest < 25.0, "H(curl) norms reached {largest}");
}

#[test]
fn error_norm_cases() {
    let coarse = EdgeSpace::structured_level(2);
    let fine = EdgeSpace::structured_level(3);
    let sol = ManufacturedCavity::solve_on(&coarse).unwrap();

    // identical fields: zero distance
    let zero = hcurl_error_vs_discrete(&coarse, &sol, &coarse, &sol);
    assert!(zero < 1e-12, "self distance {zero}");

    // nested prolongation is exact
    let lifted = fine.prolong_from(&coarse, &sol);
    let d = hcurl_error_vs_discrete(&fine, &lifted, &coarse, &sol);
    assert!(d < 1e-12, "prolonged distance {d}");

    // manufactured error roughly halves per level
    let mut errors = Vec::new();
    for level in 1..=4 {
        let space = EdgeSpace::structured_level(level);
        let s = ManufacturedCavity::solve_on(&space).unwrap();
        errors.push(ManufacturedCavity::hcurl_error(&space, &s));
    }
    for w in errors.windows(2) {
        let ratio = w[1] / w[0];
        assert!(
            (0.4..=0.62).contains(&ratio),
            "per-level ratio {ratio}, errors {errors:?}"
        );
    }
}

#[test]
fn qoi_converges_at_twice_the_field_rate() {
    let mut qoi_errors = Vec::new();
    let mut hs = Vec::new();
    for level in 1..=4 {
        let space = EdgeSpace::structured_level(level);
        let sol = ManufacturedCavity::solve_on(&space).unwrap();
        qoi_errors.push(ManufacturedCavity::qoi_error(&space, &sol, &weight_g));
        hs.push(space.h);
    }
    let n = hs.len() as f64;
    let lx: Vec<f64> = hs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = qoi_errors.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = cov / var;
    assert!(
        slope >= 1.8,
        "QoI rate {slope}, errors {qoi_errors:?}"
    );
}

/// Field-mode multilevel operators: running the telescoped quadrature in the
/// DoF-vector value space and applying the (conjugate-linear, real-weighted)
/// quantity of interest afterwards must equal the scalar-mode estimate.
#[test]
fn field_mode_ml_quadrature_commutes_with_the_qoi() {
    use shape_uq_core::ml_smolyak::{build_work_levels, ml_quadrature, WorkLevelOptions};
    use shape_uq_core::models::{CavityConfig, FemCavitySolver, LevelSolver};

    let solver = FemCavitySolver::new(CavityConfig {
        map: ParametricMap {
            theta: 0.25,
            rho: 3.0,
            n_modes: 6,
        },
        levels: 3,
        ..CavityConfig::default()
    })
    .unwrap();
    let dims: Vec<usize> = (1..=3)
        .map(|i| LevelSolver::<Complex64>::dim(&solver, i))
        .collect();
    let weights = solver.config.map.smolyak_weights(1.0);
    let w = build_work_levels(6, &weights, &dims, 1, &WorkLevelOptions::for_rate(1.0)).unwrap();
    let active = w.gamma_sets().unwrap().len();

    let scalar = ml_quadrature::<Complex64, _>(&solver, &w, 6).unwrap();
    let field = ml_quadrature::<Vec<Complex64>, _>(&solver, &w, 6).unwrap();
    assert_eq!(scalar.work, field.work);
    assert_eq!(field.value.len(), dims[active - 1]);

    let qoi_of_field = solver.qoi_of(active, &field.value);
    assert!(
        (qoi_of_field - scalar.value).norm() < 1e-11,
        "field-mode {qoi_of_field} vs scalar-mode {}",
        scalar.value
    );
}

/// The same consistency for a full MLMC realization in field mode.
#[test]
fn field_mode_mlmc_commutes_with_the_qoi() {
    use shape_uq_core::mlmc::{allocate_samples, mlmc_estimate};
    use shape_uq_core::models::{CavityConfig, FemCavitySolver};

    let solver = FemCavitySolver::new(CavityConfig {
        map: ParametricMap {
            theta: 0.25,
            rho: 3.0,
            n_modes: 6,
        },
        levels: 2,
        ..CavityConfig::default()
    })
    .unwrap();
    let alloc = allocate_samples(2, 1, 0.5, 0.1, 1.0).unwrap();
    let stream = RandomStream::new(77);
    let scalar = mlmc_estimate::<Complex64, _>(&solver, &alloc, &stream, 6).unwrap();
    let field = mlmc_estimate::<Vec<Complex64>, _>(&solver, &alloc, &stream, 6).unwrap();
    assert_eq!(scalar.work, field.work);
    let qoi_of_field = solver.qoi_of(2, &field.value);
    assert!(
        (qoi_of_field - scalar.value).norm() < 1e-11,
        "field-mode {qoi_of_field} vs scalar-mode {}",
        scalar.value
    );
}
