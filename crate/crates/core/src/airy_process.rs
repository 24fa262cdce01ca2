//! Airy_β point configurations from the edge of the tridiagonal model, their
//! rank-one Gaussian decorations, and the exponential sums built from them.
//!
//! The top eigenvectors of the Dumitriu–Edelman matrix live in its leading
//! rows: row i sits at depth i/n^{1/3} in edge units, and an eigenvector at
//! level λ decays like exp(−(2/3)(x − |λ|)^{3/2}) below depth |λ|. So the
//! points above a level L are computed from a leading window reaching a fixed
//! margin past |L|, not from the whole matrix.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DumitriuEdelman;
use crate::quadrature::gauss_legendre;
use crate::rng::Stream;
use crate::special::airy_kernel_diagonal;
use crate::tridiag::{eigenvalues_above, largest_eigenvalues};
use crate::Beta;

/// Depth past the lowest wanted level, in edge units, kept in the window.
const WINDOW_MARGIN: f64 = 12.0;

/// Truncated Airy_β configuration in edge units, descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AiryPointSample {
    pub beta: f64,
    pub points: Vec<f64>,
    pub n_sim: usize,
    /// Level below which points were discarded.
    pub cutoff_level: f64,
}

/// How much of the configuration to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    /// All points above this (negative) level.
    Level(f64),
    /// The k largest points.
    TopK(usize),
}

impl Truncation {
    /// Level at which e^{αλ} = 10⁻¹².
    pub fn default_for(alpha: f64) -> Self {
        Truncation::Level(default_cutoff(alpha))
    }
}

pub fn default_cutoff(alpha: f64) -> f64 {
    -(12.0 / alpha) * std::f64::consts::LN_10
}

fn window_rows(n: usize, depth: f64) -> usize {
    let rows = ((depth.abs() + WINDOW_MARGIN) * (n as f64).cbrt()).ceil() as usize + 8;
    rows.min(n)
}

/// N^{1/6}(μ − 2√N)
fn rescale(n: usize, mu: f64) -> f64 {
    let nf = n as f64;
    nf.powf(1.0 / 6.0) * (mu - 2.0 * nf.sqrt())
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::param("beta", format!("must be positive, got {beta}")))
    }
}

/// N^{1/6}(μ − 2√N) inverted.
fn unscale(n: usize, lambda: f64) -> f64 {
    let nf = n as f64;
    2.0 * nf.sqrt() + lambda * nf.powf(-1.0 / 6.0)
}

/// Rescaled eigenvalues of the current window above `level`, descending.
fn window_points_above(de: &DumitriuEdelman, n: usize, level: f64) -> Vec<f64> {
    eigenvalues_above(&de.block(), unscale(n, level))
        .into_iter()
        .map(|mu| rescale(n, mu))
        .filter(|&x| x > level)
        .collect()
}

/// The k largest rescaled eigenvalues of the current window.
fn window_top(de: &DumitriuEdelman, n: usize, k: usize) -> Vec<f64> {
    largest_eigenvalues(&de.block(), k).into_iter().map(|mu| rescale(n, mu)).collect()
}

/// Edge points of an n_sim×n_sim Dumitriu–Edelman matrix, truncated as asked.
pub fn sample_airy_points(beta: f64, truncation: Truncation, n_sim: usize, stream: &mut Stream) -> Result<AiryPointSample> {
    check_beta(beta)?;
    let mut de = DumitriuEdelman::new(n_sim, beta, stream.clone())?;
    let (points, cutoff_level) = match truncation {
        Truncation::Level(level) => {
            if !(level < 0.0) {
                return Err(Error::param("level", format!("cutoff must be negative, got {level}")));
            }
            de.extend_to(window_rows(n_sim, level))?;
            (window_points_above(&de, n_sim, level), level)
        }
        Truncation::TopK(k) => {
            if k == 0 || k > n_sim {
                return Err(Error::param("k", format!("need 1 <= k <= n_sim = {n_sim}, got {k}")));
            }
            // level holding about k points by the Airy counting function (2/3π)|λ|^{3/2}
            let mut depth = (1.5 * std::f64::consts::PI * k as f64).powf(2.0 / 3.0) + 3.0;
            loop {
                de.extend_to(window_rows(n_sim, depth))?;
                let pts = window_top(&de, n_sim, k);
                let enough = pts.len() == k && pts[k - 1] > -depth;
                if enough || de.rows() == n_sim {
                    let low = *pts.last().expect("k >= 1");
                    break (pts, low);
                }
                depth *= 1.5;
            }
        }
    };
    // hand the advanced stream back so callers can keep drawing
    *stream = de.into_stream();
    Ok(AiryPointSample {
        beta,
        points,
        n_sim,
        cutoff_level,
    })
}

/// Top-k rescaled eigenvalues of a fresh n_sim×n_sim tridiagonal sample.
pub fn sample_airy_edge(beta: f64, k: usize, n_sim: usize, stream: &mut Stream) -> Result<AiryPointSample> {
    sample_airy_points(beta, Truncation::TopK(k), n_sim, stream)
}

/// Airy points with per-point Gaussian decoration vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoratedSample {
    pub points: AiryPointSample,
    pub beta: Beta,
    pub a_max: usize,
    /// `u[n][a]`
    pub u: Vec<Vec<f64>>,
    /// `v[n][a]`, empty for β = 1.
    pub v: Vec<Vec<f64>>,
}

impl DecoratedSample {
    /// [W_n]_{ab}: u_a u_b for β = 1, (u_a + i v_a)(u_b − i v_b)/2 for β = 2.
    pub fn weight(&self, n: usize, a: usize, b: usize) -> Complex64 {
        match self.beta {
            Beta::One => Complex64::new(self.u[n][a] * self.u[n][b], 0.0),
            Beta::Two => {
                let za = Complex64::new(self.u[n][a], self.v[n][a]);
                let zb = Complex64::new(self.u[n][b], self.v[n][b]);
                0.5 * za * zb.conj()
            }
        }
    }
}

/// Attaches fresh i.i.d. N(0,1) decorations: for each point, u_1..u_{a_max}
/// and then (β = 2) v_1..v_{a_max}.
pub fn decorate(sample: AiryPointSample, beta: Beta, a_max: usize, stream: &mut Stream) -> Result<DecoratedSample> {
    if a_max == 0 {
        return Err(Error::param("a_max", "need at least one decoration coordinate"));
    }
    let mut u = Vec::with_capacity(sample.points.len());
    let mut v = Vec::new();
    for _ in &sample.points {
        u.push((0..a_max).map(|_| stream.gaussian()).collect());
        if beta == Beta::Two {
            v.push((0..a_max).map(|_| stream.gaussian()).collect());
        }
    }
    Ok(DecoratedSample {
        points: sample,
        beta,
        a_max,
        u,
        v,
    })
}

/// Σ_n W_n e^{αλ_n} over retained points, as a dense a_max×a_max array,
/// with the a priori bound on the discarded expected mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoratedIntegral {
    pub a_max: usize,
    /// Row-major.
    pub matrix: Vec<Complex64>,
    pub truncation_bound: f64,
}

impl DecoratedIntegral {
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.matrix[a * self.a_max + b]
    }
}

pub fn decorated_integral_exp(dec: &DecoratedSample, alpha: f64) -> Result<DecoratedIntegral> {
    check_alpha(alpha)?;
    let a_max = dec.a_max;
    let mut matrix = vec![Complex64::new(0.0, 0.0); a_max * a_max];
    for (n, &lambda) in dec.points.points.iter().enumerate() {
        let f = (alpha * lambda).exp();
        for a in 0..a_max {
            for b in 0..a_max {
                matrix[a * a_max + b] += dec.weight(n, a, b) * f;
            }
        }
    }
    let truncation_bound = if dec.points.cutoff_level < 0.0 {
        tail_truncation_bound(alpha, dec.points.cutoff_level)?
    } else {
        f64::INFINITY
    };
    Ok(DecoratedIntegral {
        a_max,
        matrix,
        truncation_bound,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::param("alpha", format!("must be positive, got {alpha}")))
    }
}

/// Parameters of the scalar KPZ sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpzParams {
    pub beta: Beta,
    pub alpha: f64,
    pub n_sim: usize,
    pub truncation: Truncation,
}

impl KpzParams {
    pub fn new(beta: Beta, alpha: f64, n_sim: usize) -> Self {
        Self {
            beta,
            alpha,
            n_sim,
            truncation: Truncation::default_for(alpha),
        }
    }
}

/// One KPZ draw with its truncation record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpzDraw {
    pub value: f64,
    pub n_points: usize,
    pub cutoff_level: f64,
    pub truncation_bound: f64,
}

/// (2/β²) Σ_n χ²_β(n) e^{αλ_n}: 2 Σ u² e^{αλ} for β = 1 and
/// Σ (u² + v²)/2 e^{αλ} for β = 2.
pub fn kpz_from_decorated(dec: &DecoratedSample, alpha: f64) -> f64 {
    let pts = &dec.points.points;
    match dec.beta {
        Beta::One => 2.0 * pts.iter().zip(&dec.u).map(|(l, u)| u[0] * u[0] * (alpha * l).exp()).sum::<f64>(),
        Beta::Two => pts
            .iter()
            .zip(dec.u.iter().zip(&dec.v))
            .map(|(l, (u, v))| 0.5 * (u[0] * u[0] + v[0] * v[0]) * (alpha * l).exp())
            .sum(),
    }
}

fn kpz_value(params: &KpzParams, stream: &mut Stream) -> Result<(f64, usize, f64)> {
    check_alpha(params.alpha)?;
    let pts = sample_airy_points(params.beta.value(), params.truncation, params.n_sim, stream)?;
    let cutoff_level = pts.cutoff_level;
    let dec = decorate(pts, params.beta, 1, stream)?;
    Ok((kpz_from_decorated(&dec, params.alpha), dec.points.points.len(), cutoff_level))
}

pub fn kpz_draw(params: &KpzParams, stream: &mut Stream) -> Result<KpzDraw> {
    let (value, n_points, cutoff_level) = kpz_value(params, stream)?;
    let truncation_bound = if cutoff_level < 0.0 {
        tail_truncation_bound(params.alpha, cutoff_level)?
    } else {
        f64::INFINITY
    };
    Ok(KpzDraw {
        value,
        n_points,
        cutoff_level,
        truncation_bound,
    })
}

/// Scalar sample distributed (up to truncation and finite n_sim) as
/// Z(2α³, 0)e^{α³/12} (β = 2) or its half-line counterpart (β = 1).
pub fn kpz_sample(params: &KpzParams, stream: &mut Stream) -> Result<f64> {
    kpz_value(params, stream).map(|d| d.0)
}

/// One-point density used for expected exponential masses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeDensity {
    /// √|λ|/π for λ < 0, zero above.
    Asymptotic,
    /// K_Ai(λ, λ).
    AiryKernel,
}

/// ∫_{-∞}^{upper} e^{αλ} ρ(λ) dλ by composite Gauss–Legendre. The lower end
/// is cut where the integrand is below 10⁻¹⁶ of its scale; `upper` may be +∞.
pub fn expected_exp_mass(alpha: f64, upper: f64, density: EdgeDensity) -> Result<f64> {
    check_alpha(alpha)?;
    let rho = |x: f64| -> Result<f64> {
        match density {
            EdgeDensity::Asymptotic => Ok(if x < 0.0 { (-x).sqrt() / std::f64::consts::PI } else { 0.0 }),
            EdgeDensity::AiryKernel => airy_kernel_diagonal(x),
        }
    };
    let hi = match density {
        EdgeDensity::Asymptotic => upper.min(0.0),
        EdgeDensity::AiryKernel => upper.min(16.0),
    };
    let lo = (-40.0 / alpha).min(hi - 40.0 / alpha) - 20.0;
    if !(lo < hi) {
        return Ok(0.0);
    }
    let panels = ((hi - lo) / 2.0).ceil() as usize;
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let rule = gauss_legendre(24, a, a + width)?;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            total += w * (alpha * x).exp() * rho(*x)?;
        }
    }
    Ok(total)
}

/// A priori estimate of E Σ_{λ < L} e^{αλ} with the asymptotic density.
pub fn tail_truncation_bound(alpha: f64, level: f64) -> Result<f64> {
    if !(level < 0.0) {
        return Err(Error::param("level", format!("cutoff must be negative, got {level}")));
    }
    expected_exp_mass(alpha, level, EdgeDensity::Asymptotic)
}
