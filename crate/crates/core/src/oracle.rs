//! Independent brute-force references for tests and error studies: a
//! full-tensor Gauss-Legendre quadrature, a direct-enumeration combination
//! oracle, and a disk cache for overkill reference expectations.
//!
//! Oracles are size-capped and use the defining formulas directly; they share
//! no code with the operators they check.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::UqError;
use crate::multiindex::{IndexSet, MultiIndex};
use crate::smolyak::ParametricFunction;
use crate::value::ValueSpace;

/// Full-tensor Gauss-Legendre quadrature of `f` over `[-1, 1]^d` against the
/// uniform probability measure. Caps: `d <= 4`, `order <= 12`.
pub fn tensor_gauss_reference<V: ValueSpace, F: ParametricFunction<V>>(
    f: &F,
    d: usize,
    order: usize,
) -> Result<V, UqError> {
    if d == 0 || d > 4 {
        return Err(UqError::InvalidParameter(format!(
            "tensor gauss reference dimension must be 1..=4, got {d}"
        )));
    }
    if order == 0 || order > 12 {
        return Err(UqError::InvalidParameter(format!(
            "tensor gauss reference order must be 1..=12, got {order}"
        )));
    }
    let (nodes, weights) = gauss_legendre_newton(order);
    let mut counter = vec![0usize; d];
    let mut y = vec![0.0f64; d];
    let mut acc: Option<V> = None;
    loop {
        let mut w = 1.0;
        for (k, &i) in counter.iter().enumerate() {
            y[k] = nodes[i];
            w *= 0.5 * weights[i];
        }
        let v = f.eval(&y)?;
        match &mut acc {
            None => {
                let mut first = v;
                first.scale_in_place(w);
                acc = Some(first);
            }
            Some(a) => a.add_scaled(w, &v),
        }
        // odometer increment
        let mut k = 0;
        loop {
            counter[k] += 1;
            if counter[k] < order {
                break;
            }
            counter[k] = 0;
            k += 1;
            if k == d {
                return Ok(acc.expect("at least one node"));
            }
        }
    }
}

/// Gauss-Legendre rule by Newton iteration, duplicated here on purpose so the
/// oracle does not share quadrature code with the production path.
fn gauss_legendre_newton(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let legendre = |x: f64| -> (f64, f64) {
        let mut p0 = 1.0f64;
        let mut p1 = x;
        for k in 2..=m {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = if m == 1 {
            1.0
        } else {
            m as f64 * (x * p1 - p0) / (x * x - 1.0)
        };
        (p1, dp)
    };
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        if m == 1 {
            x = 0.0;
        }
        for _ in 0..100 {
            let (p, dp) = legendre(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Combination coefficients by direct enumeration of `e in {0,1}^d` over the
/// active dimensions. Capped at 4 active dimensions.
pub fn combination_oracle(set: &IndexSet) -> Result<Vec<(MultiIndex, i64)>, UqError> {
    let active: Vec<usize> = {
        let mut dims = std::collections::BTreeSet::new();
        for nu in set.iter() {
            for (d, _) in nu.support() {
                dims.insert(d);
            }
        }
        dims.into_iter().collect()
    };
    if active.len() > 4 {
        return Err(UqError::InvalidParameter(format!(
            "combination oracle capped at 4 active dimensions, got {}",
            active.len()
        )));
    }
    let mut out = Vec::with_capacity(set.len());
    for nu in set.iter() {
        let mut c: i64 = 0;
        for mask in 0..(1u32 << active.len()) {
            let mut shifted = nu.clone();
            let mut ones = 0;
            for (bit, &dim) in active.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    shifted = shifted.plus_unit(dim);
                    ones += 1;
                }
            }
            if set.contains(&shifted) {
                c += if ones % 2 == 0 { 1 } else { -1 };
            }
        }
        out.push((nu.clone(), c));
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    config_hash: String,
    value_re: f64,
    value_im: f64,
}

/// FNV-1a hash of a canonical configuration string.
pub fn config_hash(config: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in config.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Disk-cached reference value keyed by the hash of its configuration.
/// Recomputes (and rewrites) when no entry for this configuration exists;
/// fails if an existing file cannot be parsed.
pub fn cached_reference(
    dir: &Path,
    config: &str,
    compute: impl FnOnce() -> Result<Complex64, UqError>,
) -> Result<Complex64, UqError> {
    let hash = config_hash(config);
    let path = dir.join(format!("overkill-{hash}.json"));
    if path.exists() {
        let text = fs::read_to_string(&path)?;
        let entry: CacheEntry =
            serde_json::from_str(&text).map_err(|e| UqError::CacheCorrupt {
                path: path.display().to_string(),
                detail: e.to_string(),
            })?;
        if entry.config_hash == hash {
            return Ok(Complex64::new(entry.value_re, entry.value_im));
        }
        return Err(UqError::CacheCorrupt {
            path: path.display().to_string(),
            detail: format!("stored hash {} does not match {hash}", entry.config_hash),
        });
    }
    let value = compute()?;
    fs::create_dir_all(dir)?;
    let entry = CacheEntry {
        config_hash: hash,
        value_re: value.re,
        value_im: value.im,
    };
    fs::write(&path, serde_json::to_string_pretty(&entry)?)?;
    Ok(value)
}
