//! Airy function Ai, its derivative, and the Airy kernel on the real line.
//!
//! For |x| ≤ 9 the Maclaurin series is summed in double-double arithmetic, which
//! absorbs the e^{(2/3)|x|^{3/2}} cancellation between the two fundamental
//! series. Beyond that the Poincaré expansions are accurate to rounding: the
//! optimally truncated remainder is about e^{-2ζ} ≤ e^{-36} relative.

use crate::dd::DD;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest |x| accepted.
pub const AIRY_DOMAIN: f64 = 200.0;

/// Series / asymptotic switch.
const SERIES_LIMIT: f64 = 9.0;

/// Ai(0) = 3^{-2/3} / Γ(2/3) as a double-double.
const AI0: DD = DD::new(0.3550280538878172, 2.05233632436212e-17);
/// -Ai'(0) = 3^{-1/3} / Γ(1/3) as a double-double.
const MINUS_AIP0: DD = DD::new(0.2588194037928068, -2.522243111610832e-17);

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Ai and Ai' at one argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryValue {
    pub x: f64,
    pub ai: f64,
    pub ai_prime: f64,
}

fn check_domain(x: f64) -> Result<()> {
    if x.is_finite() && x.abs() <= AIRY_DOMAIN {
        Ok(())
    } else {
        Err(Error::Domain {
            x,
            lo: -AIRY_DOMAIN,
            hi: AIRY_DOMAIN,
        })
    }
}

/// Ai(x) and Ai'(x) together.
pub fn airy(x: f64) -> Result<AiryValue> {
    check_domain(x)?;
    let (ai, ai_prime) = if x.abs() <= SERIES_LIMIT {
        maclaurin(x)
    } else if x > 0.0 {
        asymptotic_positive(x)
    } else {
        asymptotic_negative(-x)
    };
    Ok(AiryValue { x, ai, ai_prime })
}

pub fn airy_ai(x: f64) -> Result<f64> {
    airy(x).map(|v| v.ai)
}

pub fn airy_ai_prime(x: f64) -> Result<f64> {
    airy(x).map(|v| v.ai_prime)
}

fn sum_series(first: DD, mut ratio: impl FnMut(usize) -> DD) -> DD {
    let mut term = first;
    let mut sum = first;
    for k in 1..400 {
        term = term * ratio(k);
        sum = sum + term;
        if term.abs_hi() <= 1e-34 * sum.abs_hi().max(1e-300) {
            break;
        }
    }
    sum
}

fn maclaurin(x: f64) -> (f64, f64) {
    let x2 = DD::from_f64(x) * DD::from_f64(x);
    let x3 = x2.mul_f64(x);
    let kf = |k: usize| k as f64;

    let f = sum_series(DD::from_f64(1.0), |k| x3.div_f64((3.0 * kf(k) - 1.0) * (3.0 * kf(k))));
    let g = sum_series(DD::from_f64(x), |k| x3.div_f64((3.0 * kf(k)) * (3.0 * kf(k) + 1.0)));
    // f' starts at k = 1 with x²/2; shift the index so ratio(1) is the k = 2 ratio.
    let fp = sum_series(x2.div_f64(2.0), |j| {
        let k = kf(j + 1);
        x3.div_f64((3.0 * k - 1.0) * (3.0 * k - 3.0))
    });
    let gp = sum_series(DD::from_f64(1.0), |k| x3.div_f64((3.0 * kf(k)) * (3.0 * kf(k) - 2.0)));

    let ai = AI0 * f - MINUS_AIP0 * g;
    let aip = AI0 * fp - MINUS_AIP0 * gp;
    (ai.hi, aip.hi)
}

/// Coefficients u_k, v_k of the Airy asymptotic expansions.
fn uv_coefficients(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = Vec::with_capacity(count);
    let mut v = Vec::with_capacity(count);
    u.push(1.0);
    v.push(1.0);
    for k in 1..count {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

const N_COEFF: usize = 48;

/// Σ_j (-1)^j c_{start + step j} ζ^{-(start + step j)}, truncated at the smallest term.
fn alternating(coeff: &[f64], zeta: f64, start: usize, step: usize) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = start;
    while k < coeff.len() {
        let term = coeff[k] / zeta.powi(k as i32);
        if term.abs() > prev {
            break;
        }
        sum += sign * term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        prev = term.abs();
        sign = -sign;
        k += step;
    }
    sum
}

fn asymptotic_positive(x: f64) -> (f64, f64) {
    let (u, v) = uv_coefficients(N_COEFF);
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let q = x.powf(0.25);
    let e = (-zeta).exp() / (2.0 * SQRT_PI);
    let su = alternating(&u, zeta, 0, 1);
    let sv = alternating(&v, zeta, 0, 1);
    (e / q * su, -q * e * sv)
}

fn asymptotic_negative(t: f64) -> (f64, f64) {
    let (u, v) = uv_coefficients(N_COEFF);
    let zeta = 2.0 / 3.0 * t * t.sqrt();
    let q = t.powf(0.25);
    let theta = zeta - std::f64::consts::FRAC_PI_4;
    let (s, c) = theta.sin_cos();
    let u_even = alternating(&u, zeta, 0, 2);
    let u_odd = alternating(&u, zeta, 1, 2);
    let v_even = alternating(&v, zeta, 0, 2);
    let v_odd = alternating(&v, zeta, 1, 2);
    let ai = (c * u_even + s * u_odd) / (SQRT_PI * q);
    let aip = q / SQRT_PI * (s * v_even - c * v_odd);
    (ai, aip)
}

/// Below this separation the kernel switches to its expansion about the midpoint.
pub const KERNEL_DIAGONAL_SWITCH: f64 = 1e-4;

/// K(x, y) = (Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y).
pub fn airy_kernel(x: f64, y: f64) -> Result<f64> {
    if (x - y).abs() < KERNEL_DIAGONAL_SWITCH {
        let m = 0.5 * (x + y);
        let d = 0.5 * (x - y);
        return airy(m).map(|a| kernel_near_diagonal(a, d));
    }
    let a = airy(x)?;
    let b = airy(y)?;
    Ok(kernel_from_values(&a, &b))
}

/// Off-diagonal kernel from precomputed values; callers must ensure x ≠ y.
pub(crate) fn kernel_from_values(a: &AiryValue, b: &AiryValue) -> f64 {
    (a.ai * b.ai_prime - a.ai_prime * b.ai) / (a.x - b.x)
}

/// K(m - d, m + d) to second order in d:
/// Ai'² - m Ai² + d² (2m Ai'²/3 + Ai Ai'/3 - 2m² Ai²/3).
pub(crate) fn kernel_near_diagonal(a: AiryValue, d: f64) -> f64 {
    let m = a.x;
    let (ai, aip) = (a.ai, a.ai_prime);
    let k0 = aip * aip - m * ai * ai;
    let k2 = (2.0 * m * aip * aip + ai * aip - 2.0 * m * m * ai * ai) / 3.0;
    k0 + d * d * k2
}

/// K(λ, λ) = Ai'(λ)² - λ Ai(λ)², the Airy_2 one-point density.
pub fn airy_kernel_diagonal(x: f64) -> Result<f64> {
    airy(x).map(|a| a.ai_prime * a.ai_prime - x * a.ai * a.ai)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Γ(z) for z in (0, 3) by the Lanczos approximation (g = 7, n = 9);
    /// relative accuracy ~1e-15, independent of the Airy code path.
    fn gamma(z: f64) -> f64 {
        const G: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        if z < 0.5 {
            return std::f64::consts::PI / ((std::f64::consts::PI * z).sin() * gamma(1.0 - z));
        }
        let z = z - 1.0;
        let mut a = G[0];
        let t = z + 7.5;
        for (i, g) in G.iter().enumerate().skip(1) {
            a += g / (z + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * a
    }

    #[test]
    fn values_at_origin_match_gamma_closed_forms() {
        let ai0 = 3f64.powf(-2.0 / 3.0) / gamma(2.0 / 3.0);
        let aip0 = -(3f64.powf(-1.0 / 3.0)) / gamma(1.0 / 3.0);
        let v = airy(0.0).unwrap();
        assert!((v.ai - ai0).abs() < 1e-14, "{} vs {}", v.ai, ai0);
        assert!((v.ai_prime - aip0).abs() < 1e-14);
        assert!((v.ai - 0.355_028_053_887_817).abs() < 1e-15);
        assert!((v.ai_prime + 0.258_819_403_792_807).abs() < 1e-15);
    }

    // Reference values computed independently at 50 digits.
    const REFERENCE: [(f64, f64, f64); 11] = [
        (-40.0, -0.045_933_923_437_957_25, -1.389_090_875_260_718_4),
        (-20.0, -0.176_406_127_077_984_7, 0.892_862_856_736_471_2),
        (-9.5, 0.319_103_247_719_128_2, -0.108_095_318_811_871_24),
        (-5.0, 0.350_761_009_024_114_3, 0.327_192_818_554_443_14),
        (-1.0, 0.535_560_883_292_352_1, -0.010_160_567_116_645_209),
        (0.5, 0.231_693_606_480_833_5, -0.224_910_532_664_683_9),
        (3.0, 0.006_591_139_357_460_719, -0.011_912_976_705_951_318),
        (5.0, 0.000_108_344_428_136_074_42, -0.000_247_413_890_868_462_48),
        (9.0, 2.471_168_430_872_489_8e-9, -7.480_641_389_658_946e-9),
        (10.0, 1.104_753_255_289_868_6e-10, -3.520_633_676_738_923_6e-10),
        (20.0, 1.691_672_868_670_540_3e-27, -7.586_391_625_748_355e-27),
    ];

    #[test]
    fn matches_reference_table() {
        for &(x, ai, aip) in &REFERENCE {
            let v = airy(x).unwrap();
            let tol = if x >= -20.0 { 1e-12 } else { 1e-10 };
            assert!((v.ai - ai).abs() < tol, "Ai({x}) = {} vs {ai}", v.ai);
            assert!((v.ai_prime - aip).abs() < tol * x.abs().max(1.0).sqrt(), "Ai'({x}) = {} vs {aip}", v.ai_prime);
        }
    }

    #[test]
    fn leading_asymptotic_at_ten() {
        let x: f64 = 10.0;
        let r = airy_ai(x).unwrap() * 2.0 * SQRT_PI * x.powf(0.25) * (2.0 / 3.0 * x.powf(1.5)).exp();
        assert!((r - 1.0).abs() < 1e-2, "{r}");
        // first correction -5/(72ζ) brings it within 1e-3
        assert!((r - (1.0 - 5.0 / (72.0 * 2.0 / 3.0 * x.powf(1.5)))).abs() < 1e-3);
    }

    #[test]
    fn branches_agree_at_the_switch() {
        for &x in &[-SERIES_LIMIT, SERIES_LIMIT] {
            let (sa, sp) = maclaurin(x);
            let (aa, ap) = if x > 0.0 { asymptotic_positive(x) } else { asymptotic_negative(-x) };
            assert!((sa - aa).abs() < 1e-14, "Ai at {x}: {sa} vs {aa}");
            assert!((sp - ap).abs() < 1e-13, "Ai' at {x}: {sp} vs {ap}");
        }
    }

    #[test]
    fn ode_residual_on_grid() {
        // grid spacing 1e-3; the difference step is smaller so the h²/12 Ai'''' truncation stays below 1e-6
        let h = 2e-4;
        let mut worst: f64 = 0.0;
        for i in 0..=30_000 {
            let x = -15.0 + 1e-3 * i as f64;
            let second = (airy_ai(x + h).unwrap() - 2.0 * airy_ai(x).unwrap() + airy_ai(x - h).unwrap()) / (h * h);
            worst = worst.max((second - x * airy_ai(x).unwrap()).abs());
        }
        assert!(worst < 1e-6, "worst residual {worst}");
    }

    #[test]
    fn derivative_consistent_with_finite_difference() {
        let h = 1e-5;
        for i in 0..=60 {
            let x = -20.0 + 0.5 * i as f64;
            let fd = (airy_ai(x + h).unwrap() - airy_ai(x - h).unwrap()) / (2.0 * h);
            assert!((fd - airy_ai_prime(x).unwrap()).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn domain_is_enforced() {
        assert!(airy(200.0).is_ok());
        assert!(airy(-200.0).is_ok());
        assert!(matches!(airy(200.5), Err(Error::Domain { .. })));
        assert!(airy(f64::NAN).is_err());
        assert!(airy_kernel(0.0, -250.0).is_err());
    }

    #[test]
    fn finite_everywhere_in_domain() {
        let mut x = -200.0;
        while x <= 200.0 {
            let v = airy(x).unwrap();
            assert!(v.ai.is_finite() && v.ai_prime.is_finite(), "x = {x}");
            x += 0.37;
        }
    }

    #[test]
    fn kernel_diagonal_at_origin() {
        let k = airy_kernel(0.0, 0.0).unwrap();
        let aip0 = -0.258_819_403_792_807_f64;
        assert!((k - aip0 * aip0).abs() < 1e-15);
        assert!((k - 0.066_987_484).abs() < 1e-9);
    }

    #[test]
    fn kernel_is_exactly_symmetric() {
        let pts = [-12.3, -3.0, -0.2, 0.0, 0.7, 4.4, 9.5, 11.0];
        for &x in &pts {
            for &y in &pts {
                assert_eq!(airy_kernel(x, y).unwrap(), airy_kernel(y, x).unwrap());
            }
            assert_eq!(airy_kernel(x, x + 5e-5).unwrap(), airy_kernel(x + 5e-5, x).unwrap());
        }
    }

    #[test]
    fn kernel_continuous_across_switch() {
        let mut worst: f64 = 0.0;
        for i in 0..200 {
            let x = -15.0 + 0.13 * i as f64;
            let inside = airy_kernel(x, x + KERNEL_DIAGONAL_SWITCH * (1.0 - 1e-9)).unwrap();
            let outside = airy_kernel(x, x + KERNEL_DIAGONAL_SWITCH * (1.0 + 1e-9)).unwrap();
            worst = worst.max((inside - outside).abs());
        }
        assert!(worst < 1e-10, "mismatch {worst}");
    }

    #[test]
    fn kernel_gram_matrix_is_psd() {
        use crate::rng::SeedSpec;
        let mut s = SeedSpec::new(21, 0).stream();
        for _ in 0..5 {
            let nodes: Vec<f64> = (0..20).map(|_| -10.0 + 14.0 * s.uniform()).collect();
            let g = nalgebra::DMatrix::from_fn(20, 20, |i, j| airy_kernel(nodes[i], nodes[j]).unwrap());
            let eig = g.symmetric_eigen();
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min > -1e-10, "min eigenvalue {min}");
        }
    }
}
