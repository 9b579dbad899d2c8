//! Scaling-exponent fits with bootstrap confidence intervals.
//!
//! Near the threshold the stripping number grows like `n^{e} log n`, so we
//! fit `ln(mean rounds / ln n)` against `ln n` by ordinary least squares.
//! Trial-level bootstrap resampling (within each grid point) supplies a
//! percentile confidence interval for the slope.

use crate::math;
use crate::rng;
use crate::Error;
use alloc::format;
use alloc::vec::Vec;
use rand::Rng;

/// A fitted power law for the (log-normalized) stripping number.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScalingFit {
    pub exponent_estimate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Smallest and largest n used.
    pub n_range: (u64, u64),
    /// The exponent predicted by theory (delta / 2 in the near-critical
    /// regime, 0 at constant distance from the threshold).
    pub target_exponent: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bootstrap_resamples: u32,
}

impl ScalingFit {
    pub fn ci_covers_target(&self) -> bool {
        self.ci_low <= self.target_exponent && self.target_exponent <= self.ci_high
    }
}

fn ols(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

fn normalized_points(samples: &[(u64, Vec<f64>)], means: &[f64]) -> Result<Vec<(f64, f64)>, Error> {
    let mut pts = Vec::with_capacity(samples.len());
    for (&(n, _), &mean) in samples.iter().zip(means) {
        if !(mean > 0.0) {
            return Err(Error::domain(
                "fit_scaling",
                format!("mean rounds at n = {n} is not positive"),
            ));
        }
        let x = math::ln(n as f64);
        pts.push((x, math::ln(mean / x)));
    }
    Ok(pts)
}

/// Fit the scaling exponent from per-n trial values of the round count.
///
/// `samples` holds one `(n, rounds-per-trial)` entry per grid point; at
/// least four points are required. The bootstrap resamples trials within
/// each grid point and refits, reporting the 2.5%/97.5% slope percentiles.
pub fn fit_scaling(
    samples: &[(u64, Vec<f64>)],
    target_exponent: f64,
    resamples: u32,
    seed: u64,
) -> Result<ScalingFit, Error> {
    if samples.len() < 4 {
        return Err(Error::domain(
            "fit_scaling",
            format!("need at least 4 grid points, got {}", samples.len()),
        ));
    }
    if samples.iter().any(|(_, t)| t.is_empty()) {
        return Err(Error::domain("fit_scaling", "every grid point needs at least one trial"));
    }
    let means: Vec<f64> = samples
        .iter()
        .map(|(_, t)| t.iter().sum::<f64>() / t.len() as f64)
        .collect();
    let pts = normalized_points(samples, &means)?;
    let (slope, intercept, r2) = ols(&pts);

    let mut slopes = Vec::with_capacity(resamples as usize);
    let mut rng = rng::stream(seed, 0xB007);
    for _ in 0..resamples {
        let mut boot_means = Vec::with_capacity(samples.len());
        for (_, trials) in samples {
            let mut acc = 0.0;
            for _ in 0..trials.len() {
                acc += trials[rng.random_range(0..trials.len())];
            }
            boot_means.push(acc / trials.len() as f64);
        }
        if boot_means.iter().any(|&m| !(m > 0.0)) {
            continue;
        }
        let bpts = normalized_points(samples, &boot_means)?;
        slopes.push(ols(&bpts).0);
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (ci_low, ci_high) = if slopes.is_empty() {
        (slope, slope)
    } else {
        let lo_idx = ((slopes.len() as f64) * 0.025) as usize;
        let hi_idx = (((slopes.len() as f64) * 0.975).ceil() as usize)
            .min(slopes.len())
            .saturating_sub(1);
        (slopes[lo_idx], slopes[hi_idx])
    };

    let n_min = samples.iter().map(|&(n, _)| n).min().unwrap();
    let n_max = samples.iter().map(|&(n, _)| n).max().unwrap();
    Ok(ScalingFit {
        exponent_estimate: slope,
        intercept,
        r_squared: r2,
        n_range: (n_min, n_max),
        target_exponent,
        ci_low,
        ci_high,
        bootstrap_resamples: resamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn recovers_planted_exponent() {
        // rounds = 3 n^{0.2} ln n, exactly.
        let samples: Vec<(u64, Vec<f64>)> = [16384u64, 65536, 262144, 1048576]
            .iter()
            .map(|&n| {
                let x = (n as f64).ln();
                (n, vec![3.0 * (n as f64).powf(0.2) * x])
            })
            .collect();
        let fit = fit_scaling(&samples, 0.2, 100, 1).unwrap();
        assert!((fit.exponent_estimate - 0.2).abs() < 1e-9, "{}", fit.exponent_estimate);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-9);
        assert!(fit.r_squared > 0.999999);
        assert!(fit.ci_covers_target());
    }

    #[test]
    fn constant_log_growth_fits_flat() {
        let samples: Vec<(u64, Vec<f64>)> = [10_000u64, 40_000, 160_000, 640_000]
            .iter()
            .map(|&n| (n, vec![5.0 * (n as f64).ln()]))
            .collect();
        let fit = fit_scaling(&samples, 0.0, 50, 2).unwrap();
        assert!(fit.exponent_estimate.abs() < 1e-9);
    }

    #[test]
    fn too_few_points_rejected() {
        let samples = vec![(100u64, vec![1.0]), (200, vec![1.0]), (400, vec![1.0])];
        assert!(fit_scaling(&samples, 0.1, 10, 0).is_err());
    }

    #[test]
    fn bootstrap_ci_brackets_noisy_data() {
        let mut rngs = crate::rng::from_seed(9);
        use rand::Rng;
        let samples: Vec<(u64, Vec<f64>)> = [20_000u64, 80_000, 320_000, 1_280_000]
            .iter()
            .map(|&n| {
                let x = (n as f64).ln();
                let base = 2.0 * (n as f64).powf(0.15) * x;
                let trials: Vec<f64> = (0..20)
                    .map(|_| base * (0.9 + 0.2 * rngs.random::<f64>()))
                    .collect();
                (n, trials)
            })
            .collect();
        let fit = fit_scaling(&samples, 0.15, 200, 3).unwrap();
        assert!(fit.ci_low < fit.ci_high);
        assert!((fit.exponent_estimate - 0.15).abs() < 0.05);
    }
}
