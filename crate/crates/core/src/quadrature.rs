//! Gauss–Legendre rules.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
    pub order: usize,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule of the given order mapped to [a, b]; nodes by Newton
/// iteration on P_n from Chebyshev-like initial guesses.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if order < 2 {
        return Err(Error::param("order", format!("need at least 2 nodes, got {order}")));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::param("interval", format!("need finite a < b, got [{a}, {b}]")));
    }
    let n = order;
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 4.0 * f64::EPSILON {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::QuadratureNewton { order });
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // nodes ascending
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        interval: (a, b),
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule_closed_form() {
        let r = gauss_legendre(2, -1.0, 1.0).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + s).abs() < 1e-15 && (r.nodes[1] - s).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_exact_from_order_two() {
        for order in 2..8 {
            let r = gauss_legendre(order, 0.0, 1.0).unwrap();
            assert!((r.integrate(|x| x.powi(3)) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_positive_and_sum_to_length() {
        for &order in &[2, 3, 10, 40, 80, 161, 300] {
            let r = gauss_legendre(order, -40.0, 16.0).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            let s: f64 = r.weights.iter().sum();
            assert!((s - 56.0).abs() < 1e-12, "order {order}: {s}");
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn polynomial_exactness_up_to_2n_minus_1() {
        for &order in &[3, 7, 12, 20] {
            let r = gauss_legendre(order, -1.0, 2.0).unwrap();
            for deg in 0..(2 * order) as i32 {
                let exact = (2f64.powi(deg + 1) - (-1f64).powi(deg + 1)) / (deg + 1) as f64;
                let got = r.integrate(|x| x.powi(deg));
                assert!((got - exact).abs() < 1e-10 * exact.abs().max(1.0), "order {order} degree {deg}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gauss_legendre(1, 0.0, 1.0).is_err());
        assert!(gauss_legendre(5, 1.0, 1.0).is_err());
        assert!(gauss_legendre(5, 2.0, 1.0).is_err());
    }
}
