//! Sample generators shared by the command line and the verification battery,
//! and the battery itself.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{
    empirical_laplace, ks_report, mean_and_se, moment_check, moment_check_with_slack, ComparisonReport,
    EmpiricalSample, Provenance,
};
use crate::airy_process::{kpz_sample, tail_truncation_bound, KpzParams, Truncation};
use crate::error::{Error, Result};
use crate::excursion::{kernel_mean, kernel_rv_sample, ExcursionSettings, NoiseGrid};
use crate::fredholm::{laplace_rhs_beta1_mc, laplace_rhs_beta2, AirySamplerParams};
use crate::matrix::{dense_functional_sample, tridiagonal_functional_sample, Ensemble};
use crate::replicas::try_run_replicas;
use crate::{heat_kernel_mean, Beta, SeedSpec};

/// A scalar sampler whose replica r is a pure function of (parameters, seed, r).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "lowercase")]
pub enum Generator {
    /// Decorated-Airy exponential sum with the default cutoff.
    Kpz { beta: Beta, alpha: f64, n_sim: usize },
    /// Rescaled (1,1) moment functional of a random matrix.
    Matrix {
        ensemble: Ensemble,
        beta: f64,
        alpha: f64,
        n: usize,
    },
    /// Excursion partition function for one noise realization. Replica r uses
    /// noise seed `(noise_seed, r)` and excursion seed `(seed, r)`.
    Excursion {
        beta: f64,
        alpha: f64,
        n_excursions: usize,
        n_steps: usize,
        noise_seed: u64,
    },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Kpz { .. } => "kpz",
            Generator::Matrix { .. } => "matrix",
            Generator::Excursion { .. } => "excursion",
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            Generator::Kpz { alpha, .. } | Generator::Matrix { alpha, .. } | Generator::Excursion { alpha, .. } => alpha,
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            Generator::Kpz { beta, .. } => beta.value(),
            Generator::Matrix { beta, .. } | Generator::Excursion { beta, .. } => beta,
        }
    }

    /// Flat key/value record, used for provenance and file headers.
    pub fn parameters(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            p.insert(k.to_string(), v);
        };
        put("generator", self.name().to_string());
        put("beta", self.beta().to_string());
        put("alpha", self.alpha().to_string());
        match *self {
            Generator::Kpz { n_sim, alpha, .. } => {
                put("n_sim", n_sim.to_string());
                if let Truncation::Level(l) = Truncation::default_for(alpha) {
                    put("cutoff", l.to_string());
                }
            }
            Generator::Matrix { ensemble, n, .. } => {
                put("ensemble", ensemble.to_string());
                put("n", n.to_string());
            }
            Generator::Excursion {
                n_excursions,
                n_steps,
                noise_seed,
                alpha,
                ..
            } => {
                let st = ExcursionSettings::new(alpha, n_excursions, n_steps);
                put("n_excursions", n_excursions.to_string());
                put("n_steps", n_steps.to_string());
                put("noise_seed", noise_seed.to_string());
                put("bin_width", st.bin_width.to_string());
                put("a_max", st.a_max.to_string());
            }
        }
        p
    }

    /// Names of the auxiliary per-replica columns.
    pub fn aux_names(&self) -> &'static [&'static str] {
        match self {
            Generator::Kpz { .. } => &["truncation_bound"],
            Generator::Matrix { .. } => &["saturated"],
            Generator::Excursion { .. } => &["se", "exceedances"],
        }
    }

    fn validate(&self) -> Result<()> {
        let alpha = self.alpha();
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
        }
        match *self {
            Generator::Matrix { ensemble, beta, .. } if ensemble != Ensemble::Tridiagonal => {
                Beta::from_f64(beta)?;
            }
            Generator::Matrix { beta, .. } | Generator::Excursion { beta, .. } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::param("beta", format!("must be positive, got {beta}")));
                }
            }
            Generator::Kpz { .. } => {}
        }
        Ok(())
    }
}

/// A generated sample with its auxiliary columns (same order as
/// [`Generator::aux_names`]).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSample {
    pub sample: EmpiricalSample,
    pub aux: Vec<Vec<f64>>,
}

/// Runs `reps` replicas of `generator`; replica r draws from
/// `SeedSpec::new(seed, r)`.
pub fn generate(generator: &Generator, reps: usize, seed: u64, workers: usize) -> Result<GeneratedSample> {
    generator.validate()?;
    let base = SeedSpec::new(seed, 0);
    let rows: Vec<(f64, Vec<f64>)> = match *generator {
        Generator::Kpz { beta, alpha, n_sim } => {
            let params = KpzParams::new(beta, alpha, n_sim);
            let bound = match params.truncation {
                Truncation::Level(l) if l < 0.0 => tail_truncation_bound(alpha, l)?,
                _ => f64::INFINITY,
            };
            try_run_replicas(reps, workers, |r| {
                Ok((kpz_sample(&params, &mut base.with_stream(r).stream())?, vec![bound]))
            })?
        }
        Generator::Matrix {
            ensemble,
            beta,
            alpha,
            n,
        } => try_run_replicas(reps, workers, |r| {
            let mut s = base.with_stream(r).stream();
            let v = match ensemble {
                Ensemble::Tridiagonal => tridiagonal_functional_sample(n, beta, alpha, &mut s)?,
                _ => dense_functional_sample(n, Beta::from_f64(beta)?, ensemble, alpha, &mut s)?,
            };
            Ok((v.value, vec![if v.saturated { 1.0 } else { 0.0 }]))
        })?,
        Generator::Excursion {
            beta,
            alpha,
            n_excursions,
            n_steps,
            noise_seed,
        } => {
            let st = ExcursionSettings::new(alpha, n_excursions, n_steps);
            try_run_replicas(reps, workers, |r| {
                let noise = NoiseGrid::sample(st.a_max, st.bin_width, &mut SeedSpec::new(noise_seed, r).stream())?;
                let est = kernel_rv_sample(beta, alpha, &noise, &st, &mut base.with_stream(r).stream())?;
                Ok((est.value, vec![est.se, est.exceedances as f64]))
            })?
        }
    };
    let n_aux = generator.aux_names().len();
    let mut aux = vec![Vec::with_capacity(reps); n_aux];
    let mut values = Vec::with_capacity(reps);
    for (v, a) in rows {
        values.push(v);
        for (col, x) in aux.iter_mut().zip(a) {
            col.push(x);
        }
    }
    Ok(GeneratedSample {
        sample: EmpiricalSample {
            values,
            provenance: Provenance {
                generator: generator.name().to_string(),
                parameters: generator.parameters(),
                seed: base,
            },
        },
        aux,
    })
}

/// Pass thresholds of the battery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// KS passes when p exceeds this.
    pub ks_p: f64,
    /// Moment checks pass within this many standard errors.
    pub se_multiplier: f64,
    /// Extra relative allowance for the finite-n matrix mean.
    pub matrix_slack: f64,
    /// Confidence level of the Laplace bands.
    pub ci_level: f64,
    pub n_bootstrap: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            ks_p: 0.01,
            se_multiplier: 3.0,
            matrix_slack: 0.10,
            ci_level: 0.99,
            n_bootstrap: 1000,
        }
    }
}

/// Source of a first-moment estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum MomentSource {
    Sample { generator: Generator, reps: usize },
    KernelMean { n_excursions: usize, n_steps: usize },
}

/// One cross-check of the battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Check {
    /// Two-sample KS between two generators.
    Ks {
        name: String,
        left: Generator,
        right: Generator,
        reps: usize,
    },
    /// Bootstrap band of the β = 2 decorated-Airy Laplace transform against
    /// the Fredholm determinant.
    LaplaceBeta2 {
        alpha: f64,
        n_sim: usize,
        reps: usize,
        u_grid: Vec<f64>,
    },
    /// β = 1 decorated-Airy Laplace transform against the Airy₁ product
    /// expectation, both by Monte Carlo.
    LaplaceBeta1 {
        alpha: f64,
        n_sim: usize,
        reps: usize,
        mc_reps: usize,
        u_grid: Vec<f64>,
    },
    /// Mean against `e^{α³/12}/(2α√(πα))` (β = 2).
    FirstMoment { alpha: f64, source: MomentSource },
}

/// A list of checks with shared seed, worker count and thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    pub checks: Vec<Check>,
    pub thresholds: Thresholds,
    pub seed: u64,
    pub workers: usize,
}

impl Battery {
    pub fn empty(seed: u64) -> Self {
        Self {
            checks: Vec::new(),
            thresholds: Thresholds::default(),
            seed,
            workers: 0,
        }
    }

    /// The desk-scale battery with reduced sample sizes, scaled by `scale`
    /// (1.0 gives the sizes of the acceptance runs).
    pub fn desk(seed: u64, scale: f64) -> Self {
        let sz = |n: usize| ((n as f64 * scale).round() as usize).max(50);
        let u_grid = vec![0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
        let kpz = |beta, alpha| Generator::Kpz {
            beta,
            alpha,
            n_sim: 4000,
        };
        let mut checks = Vec::new();
        for (beta, b) in [(Beta::Two, 2.0), (Beta::One, 1.0)] {
            checks.push(Check::Ks {
                name: format!("matrix_vs_airy_beta{b}"),
                left: Generator::Matrix {
                    ensemble: Ensemble::Tridiagonal,
                    beta: b,
                    alpha: 0.5,
                    n: 100_000,
                },
                right: kpz(beta, 0.5),
                reps: sz(2000),
            });
        }
        checks.push(Check::LaplaceBeta2 {
            alpha: 1.0,
            n_sim: 4000,
            reps: sz(100_000),
            u_grid: u_grid.clone(),
        });
        checks.push(Check::LaplaceBeta1 {
            alpha: 1.0,
            n_sim: 4000,
            reps: sz(20_000),
            mc_reps: sz(20_000),
            u_grid,
        });
        checks.push(Check::Ks {
            name: "excursion_vs_airy".into(),
            left: Generator::Excursion {
                beta: 2.0,
                alpha: 1.0,
                n_excursions: 2000,
                n_steps: 256,
                noise_seed: seed ^ 0x006e_6f69_7365,
            },
            right: kpz(Beta::Two, 1.0),
            reps: sz(10_000),
        });
        checks.push(Check::FirstMoment {
            alpha: 1.0,
            source: MomentSource::Sample {
                generator: kpz(Beta::Two, 1.0),
                reps: sz(100_000),
            },
        });
        checks.push(Check::FirstMoment {
            alpha: 1.0,
            source: MomentSource::Sample {
                generator: Generator::Matrix {
                    ensemble: Ensemble::Tridiagonal,
                    beta: 2.0,
                    alpha: 1.0,
                    n: 400,
                },
                reps: sz(20_000),
            },
        });
        checks.push(Check::FirstMoment {
            alpha: 1.0,
            source: MomentSource::KernelMean {
                n_excursions: sz(100_000),
                n_steps: 8192,
            },
        });
        for beta in [Beta::Two, Beta::One] {
            let b = beta.value();
            checks.push(Check::Ks {
                name: format!("matched_vs_gaussian_beta{b}"),
                left: Generator::Matrix {
                    ensemble: Ensemble::Matched,
                    beta: b,
                    alpha: 1.0,
                    n: 400,
                },
                right: Generator::Matrix {
                    ensemble: Ensemble::Gaussian,
                    beta: b,
                    alpha: 1.0,
                    n: 400,
                },
                reps: sz(2000),
            });
        }
        Self {
            checks,
            ..Self::empty(seed)
        }
    }
}

/// Battery outcome when a generator fails part way.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialReport {
    pub completed: Vec<ComparisonReport>,
    pub error: Error,
}

impl std::fmt::Display for PartialReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} completed checks)", self.error, self.completed.len())
    }
}

impl std::error::Error for PartialReport {}

/// Samples already drawn in this run, keyed by generator and size. Two checks
/// with equal generator and size compare against the same draws.
struct Cache {
    seed: u64,
    workers: usize,
    entries: Vec<(Generator, usize, Vec<f64>)>,
}

impl Cache {
    fn get(&mut self, generator: &Generator, reps: usize) -> Result<&[f64]> {
        let hit = self.entries.iter().position(|(g, r, _)| g == generator && *r == reps);
        let idx = match hit {
            Some(i) => i,
            None => {
                // one seed family per generator kind, so left and right samples
                // of a KS check never share streams
                let tag = match generator {
                    Generator::Kpz { .. } => 1,
                    Generator::Matrix { ensemble, .. } => 2 + *ensemble as u64,
                    Generator::Excursion { .. } => 10,
                };
                let seed = SeedSpec::new(self.seed, 0).derive(tag).master_seed;
                let s = generate(generator, reps, seed, self.workers)?;
                self.entries.push((generator.clone(), reps, s.sample.values));
                self.entries.len() - 1
            }
        };
        Ok(&self.entries[idx].2)
    }
}

/// Runs every check of the battery in order.
pub fn verification_matrix(battery: &Battery) -> std::result::Result<Vec<ComparisonReport>, PartialReport> {
    let mut cache = Cache {
        seed: battery.seed,
        workers: battery.workers,
        entries: Vec::new(),
    };
    let mut done = Vec::new();
    for check in &battery.checks {
        match run_check(check, &battery.thresholds, battery.seed, battery.workers, &mut cache) {
            Ok(r) => done.push(r),
            Err(error) => {
                return Err(PartialReport {
                    completed: done,
                    error,
                })
            }
        }
    }
    Ok(done)
}

fn run_check(check: &Check, th: &Thresholds, seed: u64, workers: usize, cache: &mut Cache) -> Result<ComparisonReport> {
    match check {
        Check::Ks {
            name,
            left,
            right,
            reps,
        } => {
            let x = cache.get(left, *reps)?.to_vec();
            let y = cache.get(right, *reps)?;
            Ok(ks_report(name, &x, y, th.ks_p)?
                .with_param("left", left.name())
                .with_param("right", right.name()))
        }
        Check::LaplaceBeta2 {
            alpha,
            n_sim,
            reps,
            u_grid,
        } => {
            let generator = Generator::Kpz {
                beta: Beta::Two,
                alpha: *alpha,
                n_sim: *n_sim,
            };
            let values = cache.get(&generator, *reps)?;
            let band = empirical_laplace(
                values,
                u_grid,
                th.n_bootstrap,
                th.ci_level,
                SeedSpec::new(seed, 0).derive(20),
                workers,
            )?;
            let mut report = ComparisonReport::new("laplace_beta2", 0.0, None, true);
            let mut worst: f64 = 0.0;
            for p in &band {
                let exact = laplace_rhs_beta2(p.u, *alpha)?;
                let inside = exact >= p.lower && exact <= p.upper;
                report.passed &= inside;
                // distance outside the band in units of its half-width
                let half = 0.5 * (p.upper - p.lower);
                let excess = if half > 0.0 { (exact - p.mean).abs() / half } else { 0.0 };
                worst = worst.max(excess);
                report = report
                    .with_value(&format!("u={}:empirical", p.u), p.mean)
                    .with_value(&format!("u={}:lower", p.u), p.lower)
                    .with_value(&format!("u={}:upper", p.u), p.upper)
                    .with_value(&format!("u={}:fredholm", p.u), exact);
            }
            report.statistic = worst;
            Ok(report.with_param("reps", reps).with_param("alpha", alpha))
        }
        Check::LaplaceBeta1 {
            alpha,
            n_sim,
            reps,
            mc_reps,
            u_grid,
        } => {
            let generator = Generator::Kpz {
                beta: Beta::One,
                alpha: *alpha,
                n_sim: *n_sim,
            };
            let values = cache.get(&generator, *reps)?.to_vec();
            let sampler = AirySamplerParams {
                n_sim: *n_sim,
                truncation: Truncation::default_for(*alpha),
            };
            let mc = laplace_rhs_beta1_mc(u_grid, *alpha, sampler, *mc_reps, SeedSpec::new(seed, 0).derive(30), workers)?;
            laplace_beta1_report(&values, &mc, th.ci_level).map(|r| r.with_param("alpha", alpha))
        }
        Check::FirstMoment { alpha, source } => {
            let target = heat_kernel_mean(*alpha);
            match source {
                MomentSource::Sample { generator, reps } => {
                    let values = cache.get(generator, *reps)?;
                    let report = match generator {
                        Generator::Matrix { .. } => {
                            moment_check_with_slack(values, target, th.se_multiplier, th.matrix_slack * target)?
                        }
                        _ => moment_check(values, target, th.se_multiplier)?,
                    };
                    Ok(ComparisonReport {
                        test: format!("first_moment_{}", generator.name()),
                        ..report
                    })
                }
                MomentSource::KernelMean { n_excursions, n_steps } => {
                    let st = ExcursionSettings::new(*alpha, *n_excursions, *n_steps);
                    let est = kernel_mean(2.0, *alpha, &st, &mut SeedSpec::new(seed, 0).derive(40).stream())?;
                    Ok(estimate_check("first_moment_kernel_mean", est.value, est.se, target, th.se_multiplier)
                        .with_value("exceedances", est.exceedances as f64))
                }
            }
        }
    }
}

/// Check of a single estimate with known standard error.
pub fn estimate_check(name: &str, value: f64, se: f64, target: f64, se_multiplier: f64) -> ComparisonReport {
    let dev = (value - target).abs();
    ComparisonReport::new(name, dev, None, dev <= se_multiplier * se)
        .with_value("mean", value)
        .with_value("se", se)
        .with_value("target", target)
        .with_value("se_multiplier", se_multiplier)
}

/// Standard normal quantile.
fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// β = 1 Laplace agreement: at every u the two Monte Carlo means differ by at
/// most the two-sided `level` normal quantile times the combined SE.
pub fn laplace_beta1_report(
    values: &[f64],
    mc: &[crate::fredholm::McEstimate],
    level: f64,
) -> Result<ComparisonReport> {
    let z = normal_quantile(0.5 + 0.5 * level);
    let mut report = ComparisonReport::new("laplace_beta1", 0.0, None, true);
    let mut worst: f64 = 0.0;
    for est in mc {
        let col: Vec<f64> = values.iter().map(|x| (-est.u * x).exp()).collect();
        let (mean, se) = mean_and_se(&col)?;
        let combined = (se * se + est.se * est.se).sqrt();
        let score = if combined > 0.0 { (mean - est.mean).abs() / combined } else { 0.0 };
        report.passed &= score <= z;
        worst = worst.max(score);
        report = report
            .with_value(&format!("u={}:empirical", est.u), mean)
            .with_value(&format!("u={}:empirical_se", est.u), se)
            .with_value(&format!("u={}:airy1", est.u), est.mean)
            .with_value(&format!("u={}:airy1_se", est.u), est.se);
    }
    report.statistic = worst;
    Ok(report.with_value("z", z).with_param("count", values.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_battery_gives_empty_report() {
        assert!(verification_matrix(&Battery::empty(1)).unwrap().is_empty());
    }

    #[test]
    fn normal_quantile_values() {
        assert!((normal_quantile(0.995) - 2.575_829_303_549).abs() < 1e-9);
        assert!(normal_quantile(0.5).abs() < 1e-12);
    }

    #[test]
    fn generate_is_deterministic_and_worker_independent() {
        let g = Generator::Matrix {
            ensemble: Ensemble::Tridiagonal,
            beta: 2.0,
            alpha: 1.0,
            n: 400,
        };
        let a = generate(&g, 20, 7, 1).unwrap();
        let b = generate(&g, 20, 7, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sample.count(), 20);
    }

    #[test]
    fn dense_generators_reject_other_beta() {
        let g = Generator::Matrix {
            ensemble: Ensemble::Gaussian,
            beta: 3.0,
            alpha: 1.0,
            n: 50,
        };
        assert!(generate(&g, 1, 1, 1).is_err());
        let t = Generator::Matrix {
            ensemble: Ensemble::Tridiagonal,
            beta: 3.0,
            alpha: 1.0,
            n: 50,
        };
        assert!(generate(&t, 1, 1, 1).is_ok());
    }

    #[test]
    fn self_comparison_passes() {
        let g = Generator::Kpz {
            beta: Beta::Two,
            alpha: 1.0,
            n_sim: 500,
        };
        let battery = Battery {
            checks: vec![Check::Ks {
                name: "self".into(),
                left: g.clone(),
                right: g,
                reps: 100,
            }],
            ..Battery::empty(3)
        };
        let r = verification_matrix(&battery).unwrap();
        assert_eq!(r[0].statistic, 0.0);
        assert!(r[0].passed);
    }

    #[test]
    fn failure_keeps_completed_reports() {
        let ok = Check::FirstMoment {
            alpha: 1.0,
            source: MomentSource::Sample {
                generator: Generator::Matrix {
                    ensemble: Ensemble::Tridiagonal,
                    beta: 2.0,
                    alpha: 1.0,
                    n: 200,
                },
                reps: 10,
            },
        };
        let bad = Check::Ks {
            name: "bad".into(),
            left: Generator::Kpz {
                beta: Beta::Two,
                alpha: -1.0,
                n_sim: 100,
            },
            right: Generator::Kpz {
                beta: Beta::Two,
                alpha: 1.0,
                n_sim: 100,
            },
            reps: 10,
        };
        let battery = Battery {
            checks: vec![ok, bad],
            ..Battery::empty(3)
        };
        let err = verification_matrix(&battery).unwrap_err();
        assert_eq!(err.completed.len(), 1);
    }
}
