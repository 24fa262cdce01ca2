//! Fredholm determinants det(I − K) on L²(a, b) by Nyström discretization with
//! symmetric square-root weights, following Bornemann.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::airy_process::{sample_airy_points, tail_truncation_bound, Truncation};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, QuadratureRule};
use crate::replicas::try_run_replicas;
use crate::special::{airy, kernel_from_values, kernel_near_diagonal, AiryValue, KERNEL_DIAGONAL_SWITCH};
use crate::stats::mean_and_se;
use crate::SeedSpec;

/// Symmetric matrix A_ij = √w_i k(x_i, x_j) √w_j.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub matrix: DMatrix<f64>,
}

impl KernelMatrix {
    pub fn new(kernel: impl Fn(f64, f64) -> f64, rule: &QuadratureRule) -> Self {
        let n = rule.len();
        let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
        let mut matrix = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = sw[i] * kernel(rule.nodes[i], rule.nodes[j]) * sw[j];
                matrix[(i, j)] = v;
                matrix[(j, i)] = v;
            }
        }
        Self { matrix }
    }

    /// Airy kernel weighted by a multiplier φ: √(w_i φ_i) K(x_i, x_j) √(w_j φ_j).
    pub fn airy(rule: &QuadratureRule, phi: impl Fn(f64) -> f64) -> Result<Self> {
        let vals: Vec<AiryValue> = rule.nodes.iter().map(|&x| airy(x)).collect::<Result<_>>()?;
        let sw: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, w)| (w * phi(x)).sqrt())
            .collect();
        let n = rule.len();
        let mut matrix = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let (a, b) = (&vals[i], &vals[j]);
                let k = if (a.x - b.x).abs() < KERNEL_DIAGONAL_SWITCH {
                    // nodes are distinct, but the midpoint form is the accurate one here
                    let mid = airy(0.5 * (a.x + b.x))?;
                    kernel_near_diagonal(mid, 0.5 * (a.x - b.x))
                } else {
                    kernel_from_values(a, b)
                };
                let v = sw[i] * k * sw[j];
                matrix[(i, j)] = v;
                matrix[(j, i)] = v;
            }
        }
        Ok(Self { matrix })
    }

    pub fn is_symmetric(&self) -> bool {
        self.matrix == self.matrix.transpose()
    }

    /// det(I − A) by LU with partial pivoting.
    pub fn det_i_minus(&self) -> Result<f64> {
        let n = self.matrix.nrows();
        let m = DMatrix::<f64>::identity(n, n) - &self.matrix;
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Factorization);
        }
        let d = m.lu().determinant();
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::Factorization)
        }
    }
}

/// det(I − K) for a symmetric continuous kernel on the rule's interval.
pub fn fredholm_det(kernel: impl Fn(f64, f64) -> f64, rule: &QuadratureRule) -> Result<f64> {
    KernelMatrix::new(kernel, rule).det_i_minus()
}

/// Quadrature order used by [`tracy_widom_f2`].
pub const TW_ORDER: usize = 64;

/// Length of the interval [s, s + TW_SPAN] replacing (s, ∞); the Airy kernel
/// diagonal is below 10⁻³⁰ past s + 16 for s ≥ −10.
pub const TW_SPAN: f64 = 16.0;

fn check_tw_arg(s: f64) -> Result<()> {
    if (-10.0..=6.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::Domain { x: s, lo: -10.0, hi: 6.0 })
    }
}

/// Tracy–Widom F₂(s) = det(I − K_Ai) on L²(s, ∞), s ∈ [−10, 6].
pub fn tracy_widom_f2(s: f64) -> Result<f64> {
    tracy_widom_f2_with_order(s, TW_ORDER)
}

pub fn tracy_widom_f2_with_order(s: f64, order: usize) -> Result<f64> {
    check_tw_arg(s)?;
    let rule = gauss_legendre(order, s, s + TW_SPAN)?;
    KernelMatrix::airy(&rule, |_| 1.0)?.det_i_minus()
}

/// Mean and variance of F₂ from ∫ s dF = ∫₀^∞ (1 − F) − ∫_{−∞}^0 F and
/// E s² = 2∫₀^∞ s(1 − F) + 2∫_{−∞}^0 |s| F, on [−10, 6] with composite
/// Gauss–Legendre (`panels` × `per_panel` nodes) and F at order `order`.
pub fn tracy_widom_f2_moments(panels: usize, per_panel: usize, order: usize) -> Result<(f64, f64)> {
    let (lo, hi) = (-10.0, 6.0);
    let width = (hi - lo) / panels as f64;
    let (mut m1, mut m2) = (0.0, 0.0);
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let rule = gauss_legendre(per_panel, a, a + width)?;
        for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
            let f = tracy_widom_f2_with_order(s, order)?;
            if s >= 0.0 {
                m1 += w * (1.0 - f);
                m2 += w * 2.0 * s * (1.0 - f);
            } else {
                m1 -= w * f;
                m2 += w * 2.0 * s.abs() * f;
            }
        }
    }
    Ok((m1, m2 - m1 * m1))
}

/// Nyström setup for the β = 2 Laplace transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceQuadrature {
    /// Total number of nodes.
    pub order: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Default node count for [`laplace_rhs_beta2`].
pub const LAPLACE_ORDER: usize = 200;

const LAPLACE_FLOOR: (f64, f64) = (-40.0, 16.0);

/// Interval for φ = ue^{αλ}/(1 + ue^{αλ}): always contains [−40, 16] and is
/// pushed down until u·E Σ_{λ<L} e^{αλ} (the φ-weighted kernel mass below L)
/// is under 10⁻¹⁰.
pub fn laplace_interval(u: f64, alpha: f64) -> Result<(f64, f64)> {
    let mut lower = LAPLACE_FLOOR.0;
    if u > 0.0 {
        while u * tail_truncation_bound(alpha, lower)? > 1e-10 {
            lower -= 5.0;
        }
    }
    Ok((lower, LAPLACE_FLOOR.1))
}

fn check_laplace_args(u: f64, alpha: f64) -> Result<()> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::param("u", format!("must be finite and nonnegative, got {u}")));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    Ok(())
}

/// E ∏_k (1 + u e^{αλ_k})^{−1} over Airy₂ as det(I − √φ K_Ai √φ).
pub fn laplace_rhs_beta2(u: f64, alpha: f64) -> Result<f64> {
    laplace_rhs_beta2_with_order(u, alpha, LAPLACE_ORDER)
}

pub fn laplace_rhs_beta2_with_order(u: f64, alpha: f64, order: usize) -> Result<f64> {
    check_laplace_args(u, alpha)?;
    if u == 0.0 {
        return Ok(1.0);
    }
    let (lower, upper) = laplace_interval(u, alpha)?;
    laplace_rhs_beta2_on(
        u,
        alpha,
        LaplaceQuadrature {
            order,
            lower,
            upper,
        },
    )
}

/// Same determinant with an explicit quadrature.
pub fn laplace_rhs_beta2_on(u: f64, alpha: f64, q: LaplaceQuadrature) -> Result<f64> {
    check_laplace_args(u, alpha)?;
    if u == 0.0 {
        return Ok(1.0);
    }
    let rule = gauss_legendre(q.order, q.lower, q.upper)?;
    let phi = |x: f64| {
        // logistic in ln u + αx, written to avoid overflow
        let t = u.ln() + alpha * x;
        if t > 0.0 {
            1.0 / (1.0 + (-t).exp())
        } else {
            let e = t.exp();
            e / (1.0 + e)
        }
    };
    KernelMatrix::airy(&rule, phi)?.det_i_minus()
}

/// Monte Carlo estimate with its standard error and the interval obtained by
/// accounting for the points below the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub u: f64,
    pub mean: f64,
    pub se: f64,
    /// `mean · exp(−2u · tail bound)`; the untruncated value lies in [lower, mean]
    /// up to Monte Carlo error.
    pub corrected_lower: f64,
    pub reps: usize,
}

/// Airy-point sampler settings shared by the Monte Carlo estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirySamplerParams {
    pub n_sim: usize,
    pub truncation: Truncation,
}

/// E ∏_k (1 + 4u e^{αλ_k})^{−1/2} over Airy₁ by Monte Carlo; every u uses the
/// same point samples. Replica r draws its points from `seed.with_stream(r)`.
pub fn laplace_rhs_beta1_mc(
    u_grid: &[f64],
    alpha: f64,
    sampler: AirySamplerParams,
    reps: usize,
    seed: SeedSpec,
    workers: usize,
) -> Result<Vec<McEstimate>> {
    for &u in u_grid {
        check_laplace_args(u, alpha)?;
    }
    let per_rep = try_run_replicas(reps, workers, |r| {
        let pts = sample_airy_points(1.0, sampler.truncation, sampler.n_sim, &mut seed.with_stream(r).stream())?;
        Ok(u_grid
            .iter()
            .map(|&u| {
                let log: f64 = pts.points.iter().map(|l| (4.0 * u * (alpha * l).exp()).ln_1p()).sum();
                (-0.5 * log).exp()
            })
            .collect::<Vec<f64>>())
    })?;
    let level = match sampler.truncation {
        Truncation::Level(l) => Some(l),
        Truncation::TopK(_) => None,
    };
    let tail = match level {
        Some(l) => tail_truncation_bound(alpha, l)?,
        None => f64::INFINITY,
    };
    u_grid
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let col: Vec<f64> = per_rep.iter().map(|row| row[i]).collect();
            let (mean, se) = if col.is_empty() { (f64::NAN, f64::NAN) } else { mean_and_se(&col)? };
            let corrected_lower = if u == 0.0 { mean } else { mean * (-2.0 * u * tail).exp() };
            Ok(McEstimate {
                u,
                mean,
                se,
                corrected_lower,
                reps,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_kernel() {
        let rule = gauss_legendre(30, 0.0, 1.0).unwrap();
        let d = fredholm_det(|x, y| (x * y).sqrt(), &rule).unwrap();
        assert!((d - 0.5).abs() < 1e-10);
    }

    #[test]
    fn zero_kernel() {
        let rule = gauss_legendre(10, -1.0, 3.0).unwrap();
        assert_eq!(fredholm_det(|_, _| 0.0, &rule).unwrap(), 1.0);
    }

    #[test]
    fn airy_kernel_self_convergence_at_zero() {
        let a = tracy_widom_f2_with_order(0.0, 40).unwrap();
        let b = tracy_widom_f2_with_order(0.0, 80).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} {b}");
        // F₂(0) = 0.9694...
        assert!((b - 0.969_372_3).abs() < 1e-6, "{b}");
    }

    #[test]
    fn airy_kernel_matrix_is_symmetric_psd() {
        let rule = gauss_legendre(40, -8.0, 8.0).unwrap();
        let k = KernelMatrix::airy(&rule, |_| 1.0).unwrap();
        assert!(k.is_symmetric());
        let ev = k.matrix.clone().symmetric_eigen().eigenvalues;
        assert!(ev.iter().all(|&e| e > -1e-10));
    }

    #[test]
    fn tw2_limits_and_monotone() {
        assert!(tracy_widom_f2(-10.0).unwrap() < 1e-6);
        assert!(tracy_widom_f2(6.0).unwrap() > 1.0 - 1e-8);
        let vals: Vec<f64> = (0..=16).map(|i| tracy_widom_f2(-10.0 + i as f64).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(tracy_widom_f2(6.5).is_err());
    }

    #[test]
    fn laplace_basic_properties() {
        assert_eq!(laplace_rhs_beta2(0.0, 1.0).unwrap(), 1.0);
        let vals: Vec<f64> = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|&u| laplace_rhs_beta2(u, 1.0).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[0] > w[1]));
        assert!(vals.iter().all(|&v| v > 0.0 && v <= 1.0));
        assert!(laplace_rhs_beta2(-1.0, 1.0).is_err());
    }

    #[test]
    fn laplace_derivative_at_zero_is_first_moment() {
        let u = 1e-4;
        let d = (1.0 - laplace_rhs_beta2(u, 1.0).unwrap()) / u;
        assert!((d - crate::heat_kernel_mean(1.0)).abs() < 1e-4, "{d}");
    }

    #[test]
    fn interval_contains_floor() {
        let (lo, hi) = laplace_interval(8.0, 0.5).unwrap();
        assert!(lo <= -40.0 && hi >= 16.0);
        assert!(8.0 * tail_truncation_bound(0.5, lo).unwrap() <= 1e-10);
    }
}
