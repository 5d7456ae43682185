//! One-dimensional Leja-type interpolation nodes on `[-1, 1]`, barycentric
//! Lagrange interpolation and quadrature against the uniform probability
//! measure `d(lambda)/2`.
//!
//! Nodes are built by direct maximization of `prod_j |x - chi_j|` on a coarse
//! grid followed by golden-section refinement, seeded with `chi_0 = 1`. The
//! sequence is nested: extending it never changes earlier points. All node,
//! barycentric-weight and quadrature-weight tables are memoized process-wide
//! behind a mutex with initialize-once semantics.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::UqError;

const GRID_POINTS: usize = 100_000;
const TIE_TOLERANCE: f64 = 1e-13;

fn node_cache() -> &'static Mutex<Vec<f64>> {
    static CACHE: OnceLock<Mutex<Vec<f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![1.0]))
}

fn weight_cache() -> &'static Mutex<HashMap<usize, Arc<Vec<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn bary_cache() -> &'static Mutex<HashMap<usize, Arc<Vec<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn objective(x: f64, nodes: &[f64]) -> f64 {
    nodes.iter().map(|c| (x - c).abs()).product()
}

/// Refine an interior maximizer of `prod |x - c|` by Newton iteration on the
/// derivative of `sum ln|x - c|`. The derivative has a simple, well-conditioned
/// root between adjacent nodes, so this recovers the critical point to machine
/// precision where plain value comparison stalls on the flat top.
fn polish(lo: f64, hi: f64, x0: f64, nodes: &[f64]) -> f64 {
    let mut x = x0;
    for _ in 0..60 {
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for &c in nodes {
            let r = x - c;
            d1 += 1.0 / r;
            d2 -= 1.0 / (r * r);
        }
        if d2 == 0.0 || !d1.is_finite() || !d2.is_finite() {
            break;
        }
        let step = -d1 / d2;
        let mut xn = x + step;
        if !(lo..=hi).contains(&xn) {
            xn = 0.5 * (x + if step > 0.0 { hi } else { lo });
        }
        if (xn - x).abs() < 1e-17 {
            x = xn;
            break;
        }
        x = xn;
    }
    x
}

/// Next Leja point: maximize the node-distance product over `[-1, 1]`,
/// breaking near-ties (within 1e-13 of the maximum) towards the larger
/// abscissa.
fn next_node(nodes: &[f64]) -> f64 {
    let step = 2.0 / GRID_POINTS as f64;
    // coarse scan
    let mut best_grid = f64::NEG_INFINITY;
    let mut values = Vec::with_capacity(GRID_POINTS + 1);
    for i in 0..=GRID_POINTS {
        let x = (-1.0 + step * i as f64).min(1.0);
        let v = objective(x, nodes);
        best_grid = best_grid.max(v);
        values.push(v);
    }
    let admit = best_grid * (1.0 - 1e-6);
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for i in 0..=GRID_POINTS {
        let left = if i == 0 { f64::NEG_INFINITY } else { values[i - 1] };
        let right = if i == GRID_POINTS {
            f64::NEG_INFINITY
        } else {
            values[i + 1]
        };
        if values[i] >= admit && values[i] >= left && values[i] >= right {
            let x = (-1.0 + step * i as f64).min(1.0);
            let lo = (x - step).max(-1.0);
            let hi = (x + step).min(1.0);
            let xp = polish(lo, hi, x, nodes);
            let mut cand = (xp, objective(xp, nodes));
            // endpoints are legitimate maximizers that Newton cannot reach
            for e in [x, lo, hi] {
                let v = objective(e, nodes);
                if v > cand.1 {
                    cand = (e, v);
                }
            }
            candidates.push(cand);
        }
    }
    let best = candidates
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOLERANCE * best.max(1.0);
    candidates
        .iter()
        .filter(|&&(_, v)| v >= best - tol)
        .map(|&(x, _)| x)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The first `n + 1` Leja points (`chi_0 = 1`).
pub fn leja_points(n: usize) -> Vec<f64> {
    let mut master = node_cache().lock().expect("leja node cache poisoned");
    while master.len() < n + 1 {
        let next = next_node(&master);
        master.push(next);
    }
    master[..=n].to_vec()
}

/// Barycentric weights `b_j = 1 / prod_{k != j} (x_j - x_k)` for the first
/// `n + 1` nodes, normalized to unit maximum magnitude.
pub fn barycentric_weights(n: usize) -> Arc<Vec<f64>> {
    if let Some(w) = bary_cache().lock().expect("cache poisoned").get(&n) {
        return w.clone();
    }
    let nodes = leja_points(n);
    let mut weights = vec![0.0; n + 1];
    for j in 0..=n {
        let mut prod = 1.0;
        for k in 0..=n {
            if k != j {
                prod *= nodes[j] - nodes[k];
            }
        }
        weights[j] = 1.0 / prod;
    }
    let scale = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    for w in &mut weights {
        *w /= scale;
    }
    let arc = Arc::new(weights);
    bary_cache()
        .lock()
        .expect("cache poisoned")
        .entry(n)
        .or_insert_with(|| arc.clone())
        .clone()
}

/// Values of all `n + 1` Lagrange basis polynomials at `x`, by the second
/// barycentric form. Exact node hits return the indicator.
pub fn lagrange_basis_at(n: usize, x: f64) -> Vec<f64> {
    let nodes = leja_points(n);
    let weights = barycentric_weights(n);
    let mut out = vec![0.0; n + 1];
    for (j, &xj) in nodes.iter().enumerate() {
        if x == xj {
            out[j] = 1.0;
            return out;
        }
    }
    let terms: Vec<f64> = (0..=n).map(|j| weights[j] / (x - nodes[j])).collect();
    let denom: f64 = terms.iter().sum();
    for j in 0..=n {
        out[j] = terms[j] / denom;
    }
    out
}

/// Evaluate at `x` the polynomial of degree <= n interpolating `values` at
/// the first `n + 1` Leja points.
pub fn interpolate_1d(values: &[Complex64], x: f64) -> Result<Complex64, UqError> {
    if values.is_empty() {
        return Err(UqError::LengthMismatch {
            expected: 1,
            got: 0,
        });
    }
    let n = values.len() - 1;
    let basis = lagrange_basis_at(n, x);
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, v) in basis.iter().zip(values) {
        acc += b * v;
    }
    Ok(acc)
}

/// Quadrature weights `w_j = int l_j d(lambda)/2` on the first `n + 1` Leja
/// points, computed with a Gauss-Legendre rule exact on degree `n`.
pub fn quad_weights_1d(n: usize) -> Arc<Vec<f64>> {
    if let Some(w) = weight_cache().lock().expect("cache poisoned").get(&n) {
        return w.clone();
    }
    let m = n / 2 + 1; // 2m - 1 >= n
    let (gx, gw) = gauss_legendre(m);
    let mut weights = vec![0.0; n + 1];
    for (x, w) in gx.iter().zip(&gw) {
        let basis = lagrange_basis_at(n, *x);
        for j in 0..=n {
            weights[j] += 0.5 * w * basis[j];
        }
    }
    let arc = Arc::new(weights);
    weight_cache()
        .lock()
        .expect("cache poisoned")
        .entry(n)
        .or_insert_with(|| arc.clone())
        .clone()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, x);
        nodes[m - 1 - i] = x;
        weights[m - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
