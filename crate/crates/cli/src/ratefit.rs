//! Least-squares rate fitting on log(error) vs log(work), with a bootstrap
//! confidence interval.

use crate::CliError;

/// A fitted log-log slope with a bootstrap percentile interval.
#[derive(Clone, Copy, Debug)]
pub struct RateFit {
    pub slope: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
}

pub fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

/// Fit `log(error) ~ slope * log(work)` over `(work, error)` pairs; errors
/// that are not strictly positive are dropped. Needs at least 4 usable
/// points. The interval is the 2.5/97.5 percentile range of `resamples`
/// bootstrap slopes drawn with a seeded counter stream.
pub fn fit_rate(points: &[(f64, f64)], resamples: usize, seed: u64) -> Result<RateFit, CliError> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(w, e)| *w > 0.0 && *e > 0.0)
        .collect();
    if usable.len() < 4 {
        return Err(CliError::Config(format!(
            "rate fit needs at least 4 budget points with positive error, got {}",
            usable.len()
        )));
    }
    let slope = log_slope(&usable);
    let stream = shape_uq_core::mlmc::RandomStream::new(seed);
    let mut slopes = Vec::with_capacity(resamples);
    for b in 0..resamples {
        let mut sample = Vec::with_capacity(usable.len());
        for i in 0..usable.len() {
            let u = 0.5 * (stream.uniform(b as u64, i as u64, 0) + 1.0);
            let pick = ((u * usable.len() as f64) as usize).min(usable.len() - 1);
            sample.push(usable[pick]);
        }
        // a degenerate resample (single distinct x) yields NaN; skip it
        let s = log_slope(&sample);
        if s.is_finite() {
            slopes.push(s);
        }
    }
    slopes.sort_by(|a, b| a.total_cmp(b));
    let pick = |q: f64| {
        if slopes.is_empty() {
            slope
        } else {
            let idx = ((slopes.len() as f64 - 1.0) * q).round() as usize;
            slopes[idx]
        }
    };
    Ok(RateFit {
        slope,
        ci_low: pick(0.025),
        ci_high: pick(0.975),
        points: usable.len(),
    })
}
