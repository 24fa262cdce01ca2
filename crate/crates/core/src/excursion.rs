//! Brownian excursions of duration 2α, their areas and local times, and the
//! partition function `E_e exp(−½∫e dt + β^{-1/2}∫L_a dW(a))` driven by a
//! white noise in the level variable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// How excursion paths are generated on the time grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExcursionMethod {
    /// Norm of a three-dimensional Brownian bridge. Exact in law at the grid
    /// times.
    #[default]
    Bessel3,
    /// Vervaat transform of a Gaussian random-walk bridge. Carries an
    /// O(n_steps^{-1/2}) bias from the discrete minimum.
    Vervaat,
}

/// Nonnegative path on a uniform grid of `[0, duration]` with zero endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionPath {
    duration: f64,
    values: Vec<f64>,
}

impl ExcursionPath {
    pub fn new(duration: f64, values: Vec<f64>) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::param("duration", format!("must be positive, got {duration}")));
        }
        if values.len() < 2 {
            return Err(Error::param("values", "need at least two grid values"));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::param("values", "path must be finite and nonnegative"));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            return Err(Error::param("values", "endpoints must be zero"));
        }
        Ok(Self { duration, values })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.duration / self.n_steps() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, &v| m.max(v))
    }
}

fn check_steps(n_steps: usize) -> Result<()> {
    if n_steps < 100 {
        return Err(Error::param("n_steps", format!("need at least 100, got {n_steps}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::param("alpha", format!("must be positive, got {alpha}")))
    }
}

/// Standard excursion of duration 2α with the default method.
pub fn sample_excursion(alpha: f64, n_steps: usize, stream: &mut Stream) -> Result<ExcursionPath> {
    sample_excursion_with(alpha, n_steps, ExcursionMethod::Bessel3, stream)
}

pub fn sample_excursion_with(
    alpha: f64,
    n_steps: usize,
    method: ExcursionMethod,
    stream: &mut Stream,
) -> Result<ExcursionPath> {
    check_alpha(alpha)?;
    check_steps(n_steps)?;
    let duration = 2.0 * alpha;
    let mut values = vec![0.0; n_steps + 1];
    match method {
        ExcursionMethod::Bessel3 => bessel3_into(duration, stream, &mut values),
        ExcursionMethod::Vervaat => vervaat_into(duration, stream, &mut values),
    }
    Ok(ExcursionPath { duration, values })
}

fn bessel3_into(duration: f64, stream: &mut Stream, out: &mut [f64]) {
    let n = out.len() - 1;
    let sh = (duration / n as f64).sqrt();
    let mut walk = vec![0.0; 3 * (n + 1)];
    for c in 0..3 {
        let w = &mut walk[c * (n + 1)..(c + 1) * (n + 1)];
        for i in 1..=n {
            w[i] = w[i - 1] + sh * stream.gaussian();
        }
    }
    out[0] = 0.0;
    out[n] = 0.0;
    for i in 1..n {
        let frac = i as f64 / n as f64;
        let mut r2 = 0.0;
        for c in 0..3 {
            let w = &walk[c * (n + 1)..(c + 1) * (n + 1)];
            let b = w[i] - frac * w[n];
            r2 += b * b;
        }
        out[i] = r2.sqrt();
    }
}

fn vervaat_into(duration: f64, stream: &mut Stream, out: &mut [f64]) {
    let n = out.len() - 1;
    let sh = (duration / n as f64).sqrt();
    let mut inc: Vec<f64> = (0..n).map(|_| sh * stream.gaussian()).collect();
    let mean = inc.iter().sum::<f64>() / n as f64;
    for x in &mut inc {
        *x -= mean;
    }
    let mut bridge = vec![0.0; n];
    for i in 1..n {
        bridge[i] = bridge[i - 1] + inc[i - 1];
    }
    let m = (0..n).fold(0, |m, i| if bridge[i] < bridge[m] { i } else { m });
    for k in 0..n {
        out[k] = (bridge[(k + m) % n] - bridge[m]).max(0.0);
    }
    out[0] = 0.0;
    out[n] = 0.0;
}

/// Trapezoidal ∫e(t)dt.
pub fn excursion_area(path: &ExcursionPath) -> f64 {
    trapezoid(&path.values, path.duration)
}

/// Trapezoidal integral of grid values spread uniformly over `[0, duration]`.
pub fn trapezoid(values: &[f64], duration: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    if n == 0 {
        return 0.0;
    }
    let inner: f64 = values[1..n].iter().sum();
    duration / n as f64 * (inner + 0.5 * (values[0] + values[n]))
}

/// Occupation density on levels `a_i = iΔ`: `values[i]` is the time spent in
/// `[a_i, a_i + Δ)` divided by Δ, with the path linearly interpolated between
/// grid times.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeProfile {
    pub bin_width: f64,
    pub values: Vec<f64>,
}

impl LocalTimeProfile {
    pub fn level(&self, i: usize) -> f64 {
        i as f64 * self.bin_width
    }

    /// Σ L_i Δ, equal to the duration.
    pub fn total_time(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.bin_width
    }

    /// Σ a_i L_i Δ, the area up to O(Δ).
    pub fn first_moment(&self) -> f64 {
        self.values.iter().enumerate().map(|(i, l)| self.level(i) * l).sum::<f64>() * self.bin_width
    }

    /// Σ L_i² Δ.
    pub fn square_integral(&self) -> f64 {
        self.values.iter().map(|l| l * l).sum::<f64>() * self.bin_width
    }
}

pub fn local_time(path: &ExcursionPath, bin_width: f64) -> Result<LocalTimeProfile> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::param("bin_width", format!("must be positive, got {bin_width}")));
    }
    let mut times = Vec::new();
    occupation(&path.values, 1, path.step(), bin_width, &mut times);
    for t in &mut times {
        *t /= bin_width;
    }
    Ok(LocalTimeProfile {
        bin_width,
        values: times,
    })
}

/// Occupation times of the bins `[iΔ, (i+1)Δ)` for the piecewise-linear path
/// through every `stride`-th grid value, each segment lasting `stride·h`.
fn occupation(values: &[f64], stride: usize, h: f64, width: f64, out: &mut Vec<f64>) {
    out.clear();
    let dt = stride as f64 * h;
    let n = (values.len() - 1) / stride;
    for s in 0..n {
        let (y0, y1) = (values[s * stride], values[(s + 1) * stride]);
        let (lo, hi) = if y0 <= y1 { (y0, y1) } else { (y1, y0) };
        let (b0, b1) = ((lo / width) as usize, (hi / width) as usize);
        if out.len() <= b1 {
            out.resize(b1 + 1, 0.0);
        }
        if b0 == b1 {
            out[b0] += dt;
            continue;
        }
        let rate = dt / (hi - lo);
        out[b0] += ((b0 + 1) as f64 * width - lo) * rate;
        for slot in &mut out[b0 + 1..b1] {
            *slot += width * rate;
        }
        out[b1] += (hi - b1 as f64 * width) * rate;
    }
}

/// Gaussian increments `ΔW_i ~ N(0, Δ)` of a Brownian motion on the level
/// bins `[iΔ, (i+1)Δ)` below `a_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseGrid {
    pub bin_width: f64,
    pub increments: Vec<f64>,
}

impl NoiseGrid {
    fn bins(a_max: f64, bin_width: f64) -> Result<usize> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::param("bin_width", format!("must be positive, got {bin_width}")));
        }
        if !(a_max > 0.0 && a_max.is_finite()) {
            return Err(Error::param("a_max", format!("must be positive, got {a_max}")));
        }
        // even, so pairs of bins form the coarse grid
        let bins = (a_max / bin_width).ceil() as usize;
        Ok(bins + bins % 2)
    }

    pub fn sample(a_max: f64, bin_width: f64, stream: &mut Stream) -> Result<Self> {
        let bins = Self::bins(a_max, bin_width)?;
        let sd = bin_width.sqrt();
        Ok(Self {
            bin_width,
            increments: (0..bins).map(|_| sd * stream.gaussian()).collect(),
        })
    }

    pub fn zero(a_max: f64, bin_width: f64) -> Result<Self> {
        Ok(Self {
            bin_width,
            increments: vec![0.0; Self::bins(a_max, bin_width)?],
        })
    }

    /// Upper end of the covered levels.
    pub fn a_max(&self) -> f64 {
        self.increments.len() as f64 * self.bin_width
    }
}

/// Resolution and sample size of the excursion average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcursionSettings {
    pub n_excursions: usize,
    pub n_steps: usize,
    /// Δ of the local-time histogram and noise grid.
    pub bin_width: f64,
    /// Paths reaching this level are rejected and counted.
    pub a_max: f64,
    pub method: ExcursionMethod,
    /// Use the (n_steps/4, 2Δ) local time to cancel the leading
    /// discretization error of ∫L² da, and to remove the matching excess
    /// variance from the noise term of [`kernel_rv_sample`].
    pub extrapolate: bool,
}

impl ExcursionSettings {
    pub fn new(alpha: f64, n_excursions: usize, n_steps: usize) -> Self {
        Self {
            n_excursions,
            n_steps,
            bin_width: default_bin_width(alpha),
            a_max: default_a_max(alpha),
            method: ExcursionMethod::Bessel3,
            extrapolate: true,
        }
    }

    fn validate(&self, alpha: f64) -> Result<()> {
        check_alpha(alpha)?;
        check_steps(self.n_steps)?;
        if self.n_excursions == 0 {
            return Err(Error::param("n_excursions", "must be positive"));
        }
        if self.extrapolate && !self.n_steps.is_multiple_of(4) {
            return Err(Error::param("n_steps", "must be a multiple of 4 when extrapolating"));
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(Error::param("bin_width", format!("must be positive, got {}", self.bin_width)));
        }
        Ok(())
    }
}

/// Δ = √(2α)/128.
pub fn default_bin_width(alpha: f64) -> f64 {
    (2.0 * alpha).sqrt() / 128.0
}

/// A_max = 4√(2α).
pub fn default_a_max(alpha: f64) -> f64 {
    4.0 * (2.0 * alpha).sqrt()
}

/// Excursion-average estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEstimate {
    pub value: f64,
    pub se: f64,
    /// Paths rejected for reaching `a_max`.
    pub exceedances: usize,
    /// Paths entering the average.
    pub used: usize,
}

fn prefactor(beta: f64, alpha: f64) -> f64 {
    1.0 / (beta * alpha * (std::f64::consts::PI * alpha).sqrt())
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::param("beta", format!("must be positive, got {beta}")))
    }
}

/// Noise-dependent part of the exponent, from the fine and coarse occupation
/// times of one path.
type Exponent<'a> = dyn FnMut(&[f64], &[f64]) -> f64 + 'a;

fn excursion_average(
    alpha: f64,
    settings: &ExcursionSettings,
    stream: &mut Stream,
    exponent: &mut Exponent<'_>,
) -> Result<KernelEstimate> {
    settings.validate(alpha)?;
    let duration = 2.0 * alpha;
    let h = duration / settings.n_steps as f64;
    let mut path = vec![0.0; settings.n_steps + 1];
    let (mut fine, mut coarse) = (Vec::new(), Vec::new());
    let mut terms = Vec::with_capacity(settings.n_excursions);
    let mut exceedances = 0;
    for _ in 0..settings.n_excursions {
        match settings.method {
            ExcursionMethod::Bessel3 => bessel3_into(duration, stream, &mut path),
            ExcursionMethod::Vervaat => vervaat_into(duration, stream, &mut path),
        }
        if path.iter().any(|&v| v >= settings.a_max) {
            exceedances += 1;
            continue;
        }
        let inner: f64 = path[1..settings.n_steps].iter().sum();
        let area = h * inner;
        occupation(&path, 1, h, settings.bin_width, &mut fine);
        if settings.extrapolate {
            occupation(&path, 4, h, 2.0 * settings.bin_width, &mut coarse);
        }
        terms.push(-0.5 * area + exponent(&fine, &coarse));
    }
    if terms.is_empty() {
        return Err(Error::EmptySample);
    }
    // factor the largest exponent out before averaging
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = terms.iter().map(|t| (t - top).exp()).collect();
    let (mean, se) = crate::stats::mean_and_se(&w)?;
    let scale = top.exp();
    Ok(KernelEstimate {
        value: mean * scale,
        se: se * scale,
        exceedances,
        used: w.len(),
    })
}

/// One draw of the random variable
/// `(βα√(πα))^{-1} E_e exp(−½∫e dt + β^{-1/2} Σ_i L_i ΔW_i)` for the supplied
/// noise, with the excursion expectation replaced by an average over
/// `settings.n_excursions` paths.
pub fn kernel_rv_sample(
    beta: f64,
    alpha: f64,
    noise: &NoiseGrid,
    settings: &ExcursionSettings,
    stream: &mut Stream,
) -> Result<KernelEstimate> {
    check_beta(beta)?;
    if noise.bin_width != settings.bin_width {
        return Err(Error::param("noise", "bin width differs from the local-time bin width"));
    }
    let a_max = settings.a_max.min(noise.a_max());
    let settings = ExcursionSettings { a_max, ..*settings };
    let dw = &noise.increments;
    let inv_sqrt_beta = beta.sqrt().recip();
    let (w, extrapolate) = (settings.bin_width, settings.extrapolate);
    let mut exponent = |fine: &[f64], coarse: &[f64]| {
        // occupation times t_i = L_i Δ, so Σ L_i ΔW_i = Σ t_i ΔW_i / Δ
        let x = inv_sqrt_beta * dot(fine, dw) / w;
        if extrapolate {
            // The piecewise-linear local time carries path-specific roughness
            // that acts as independent noise per excursion. Remove its variance
            // so that the noise average matches the extrapolated kernel_mean.
            let sf = fine.iter().map(|t| t * t).sum::<f64>() / w;
            let sc = coarse.iter().map(|t| t * t).sum::<f64>() / (2.0 * w);
            x - (sc - sf) / (2.0 * beta)
        } else {
            x
        }
    };
    let est = excursion_average(alpha, &settings, stream, &mut exponent)?;
    Ok(scale_estimate(est, prefactor(beta, alpha)))
}

/// `(βα√(πα))^{-1} E_e exp(−½∫e dt + (2β)^{-1} Σ L_i² Δ)`, the noise average
/// of [`kernel_rv_sample`] taken in closed form.
pub fn kernel_mean(
    beta: f64,
    alpha: f64,
    settings: &ExcursionSettings,
    stream: &mut Stream,
) -> Result<KernelEstimate> {
    check_beta(beta)?;
    let (w, extrapolate) = (settings.bin_width, settings.extrapolate);
    let mut exponent = |fine: &[f64], coarse: &[f64]| {
        let sf = fine.iter().map(|t| t * t).sum::<f64>() / w;
        let s = if extrapolate {
            2.0 * sf - coarse.iter().map(|t| t * t).sum::<f64>() / (2.0 * w)
        } else {
            sf
        };
        s / (2.0 * beta)
    };
    let est = excursion_average(alpha, settings, stream, &mut exponent)?;
    Ok(scale_estimate(est, prefactor(beta, alpha)))
}

fn scale_estimate(est: KernelEstimate, c: f64) -> KernelEstimate {
    KernelEstimate {
        value: est.value * c,
        se: est.se * c,
        ..est
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
