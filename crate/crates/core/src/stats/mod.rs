//! Agreement tests between samples and between samples and exact curves.

mod battery;

pub use battery::{
    estimate_check, generate, laplace_beta1_report, verification_matrix, Battery, Check, GeneratedSample, Generator,
    MomentSource, PartialReport, Thresholds,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::replicas::run_replicas;
use crate::SeedSpec;

/// Sum by recursive halving; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample mean and its standard error (unbiased variance).
pub fn mean_and_se(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() == 1 {
        return Ok((mean, 0.0));
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Where a sample came from: enough to regenerate it bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: SeedSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSample {
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl EmpiricalSample {
    pub fn count(&self) -> usize {
        self.values.len()
    }
}

/// Outcome of one check. `passed` is a function of the recorded numbers only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub test: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    /// Named auxiliary numbers (means, SEs, thresholds, ...).
    pub values: BTreeMap<String, f64>,
    pub passed: bool,
    pub parameters: BTreeMap<String, String>,
}

impl ComparisonReport {
    pub fn new(test: impl Into<String>, statistic: f64, p_value: Option<f64>, passed: bool) -> Self {
        Self {
            test: test.into(),
            statistic,
            p_value,
            values: BTreeMap::new(),
            passed,
            parameters: BTreeMap::new(),
        }
    }

    pub fn with_value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    pub fn with_param(mut self, key: &str, v: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), v.to_string());
        self
    }
}

/// Q_KS(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}, 100 terms.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        sum += sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d: f64,
    pub p: f64,
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::param("sample", "contains NaN"));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample Kolmogorov–Smirnov statistic with the asymptotic p-value at
/// effective size nm/(n + m).
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<KsResult> {
    let a = sorted(x)?;
    let b = sorted(y)?;
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let t = a[i].min(b[j]);
        while i < n && a[i] <= t {
            i += 1;
        }
        while j < m && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    Ok(KsResult {
        d,
        p: kolmogorov_survival(ne.sqrt() * d),
    })
}

/// One-sample KS distance sup |F_n − F| with its asymptotic p-value.
pub fn ks_against_cdf(x: &[f64], mut cdf: impl FnMut(f64) -> Result<f64>) -> Result<KsResult> {
    let a = sorted(x)?;
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in a.iter().enumerate() {
        let f = cdf(v)?;
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(KsResult {
        d,
        p: kolmogorov_survival(n.sqrt() * d),
    })
}

/// Empirical Laplace transform at one u with a percentile bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacePoint {
    pub u: f64,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Percentile of a sorted slice by linear interpolation.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Means of exp(−u·value) over `u_grid` with percentile bootstrap intervals
/// at `level` (e.g. 0.99). Bootstrap replicate b resamples with
/// `seed.with_stream(b)`.
pub fn empirical_laplace(
    values: &[f64],
    u_grid: &[f64],
    n_bootstrap: usize,
    level: f64,
    seed: SeedSpec,
    workers: usize,
) -> Result<Vec<LaplacePoint>> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(u) = u_grid.iter().find(|u| !(**u >= 0.0)) {
        return Err(Error::param("u", format!("must be nonnegative, got {u}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param("level", format!("must lie in (0, 1), got {level}")));
    }
    let n = values.len();
    let table: Vec<Vec<f64>> = u_grid.iter().map(|&u| values.iter().map(|x| (-u * x).exp()).collect()).collect();
    let means: Vec<f64> = table.iter().map(|col| pairwise_sum(col) / n as f64).collect();
    let boot: Vec<Vec<f64>> = run_replicas(n_bootstrap, workers, |b| {
        let mut s = seed.with_stream(b).stream();
        let idx: Vec<usize> = (0..n).map(|_| s.below(n)).collect();
        table
            .iter()
            .map(|col| {
                let picked: Vec<f64> = idx.iter().map(|&i| col[i]).collect();
                pairwise_sum(&picked) / n as f64
            })
            .collect()
    });
    let tail = 0.5 * (1.0 - level);
    Ok(u_grid
        .iter()
        .enumerate()
        .map(|(k, &u)| {
            if n_bootstrap == 0 {
                return LaplacePoint {
                    u,
                    mean: means[k],
                    lower: means[k],
                    upper: means[k],
                };
            }
            let mut col: Vec<f64> = boot.iter().map(|row| row[k]).collect();
            col.sort_by(f64::total_cmp);
            LaplacePoint {
                u,
                mean: means[k],
                lower: percentile(&col, tail),
                upper: percentile(&col, 1.0 - tail),
            }
        })
        .collect())
}

/// Passes iff |mean − target| ≤ se_multiplier·SE.
pub fn moment_check(values: &[f64], target: f64, se_multiplier: f64) -> Result<ComparisonReport> {
    moment_check_with_slack(values, target, se_multiplier, 0.0)
}

/// Passes iff |mean − target| ≤ se_multiplier·SE + slack.
pub fn moment_check_with_slack(values: &[f64], target: f64, se_multiplier: f64, slack: f64) -> Result<ComparisonReport> {
    let (mean, se) = mean_and_se(values)?;
    let dev = (mean - target).abs();
    let passed = dev <= se_multiplier * se + slack;
    Ok(ComparisonReport::new("moment", dev, None, passed)
        .with_value("mean", mean)
        .with_value("se", se)
        .with_value("target", target)
        .with_value("se_multiplier", se_multiplier)
        .with_value("slack", slack)
        .with_param("count", values.len()))
}

/// KS report against a p-value threshold.
pub fn ks_report(name: &str, x: &[f64], y: &[f64], p_threshold: f64) -> Result<ComparisonReport> {
    let r = ks_two_sample(x, y)?;
    Ok(ComparisonReport::new(name, r.d, Some(r.p), r.p > p_threshold)
        .with_value("p_threshold", p_threshold)
        .with_param("n_x", x.len())
        .with_param("n_y", y.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_reference_values() {
        // Q_KS(1) = 0.26999967, Q_KS(1.36) ≈ 0.0494
        assert!((kolmogorov_survival(1.0) - 0.269_999_67).abs() < 1e-7);
        assert!((kolmogorov_survival(1.358_099) - 0.05).abs() < 1e-5);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        assert!(kolmogorov_survival(3.0) < 1e-7);
    }

    #[test]
    fn ks_self_is_zero() {
        let x: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let r = ks_two_sample(&x, &x).unwrap();
        assert_eq!(r.d, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn ks_detects_shift() {
        let mut s = SeedSpec::new(1, 0).stream();
        let x: Vec<f64> = (0..2000).map(|_| s.uniform()).collect();
        let y: Vec<f64> = (0..2000).map(|_| s.uniform() + 0.5).collect();
        assert!(ks_two_sample(&x, &y).unwrap().p < 1e-6);
    }

    #[test]
    fn ks_with_ties() {
        let r = ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap();
        assert!((r.d - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ks_rejects_empty() {
        assert_eq!(ks_two_sample(&[], &[1.0]), Err(Error::EmptySample));
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }

    #[test]
    fn laplace_edge_cases() {
        let vals = vec![2.0; 50];
        let pts = empirical_laplace(&vals, &[0.0, 1.0], 100, 0.99, SeedSpec::new(1, 0), 1).unwrap();
        assert_eq!((pts[0].mean, pts[0].lower, pts[0].upper), (1.0, 1.0, 1.0));
        assert!((pts[1].mean - (-2.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn moment_check_cases() {
        assert!(moment_check(&[3.0; 10], 3.0, 3.0).unwrap().passed);
        let mut s = SeedSpec::new(2, 0).stream();
        let xs: Vec<f64> = (0..10_000).map(|_| s.gaussian()).collect();
        assert!(moment_check(&xs, 0.0, 4.0).unwrap().passed);
        assert!(!moment_check(&xs, 0.1, 4.0).unwrap().passed);
    }
}
