//! Wigner and tridiagonal β-ensembles and the rescaled high-power functionals
//! `(n/β)[(M/2√n)^{2m} + (M/2√n)^{2m+1}]_{11}`, `m = ⌊α n^{2/3}⌋`.
//!
//! The (1,1) functional only sees the spectral measure at e₁, which both
//! Householder tridiagonalization and Lanczos from e₁ preserve. Moreover the
//! moments up to order 2m + 1 only involve the leading m + 1 rows of the
//! tridiagonal model, so a large-n sample needs just a leading block.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{EntryPosition, Stream};
use crate::tridiag::{ql_implicit, spectral_at_e1, SpectralMeasureAtE1, TridiagonalSym};
use crate::Beta;

/// Largest dimension accepted by [`full_eigen`] unless overridden.
pub const DENSE_CAP: usize = 2000;

/// Largest number of index paths [`path_sum_oracle`] will enumerate.
pub const PATH_SUM_LIMIT: f64 = 1e7;

/// Entry distribution of a sampled matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    /// GOE / GUE.
    Gaussian,
    /// Bounded entries matching the Gaussian moments up to order four.
    Matched,
    /// Dumitriu–Edelman tridiagonal model.
    Tridiagonal,
}

impl std::str::FromStr for Ensemble {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Ensemble::Gaussian),
            "matched" => Ok(Ensemble::Matched),
            "tridiagonal" => Ok(Ensemble::Tridiagonal),
            other => Err(Error::param(
                "ensemble",
                format!("expected gaussian, matched or tridiagonal, got {other}"),
            )),
        }
    }
}

impl std::fmt::Display for Ensemble {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Ensemble::Gaussian => "gaussian",
            Ensemble::Matched => "matched",
            Ensemble::Tridiagonal => "tridiagonal",
        })
    }
}

/// Dense Hermitian matrix, row-major. Real symmetric matrices (β = 1) are
/// stored with zero imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    pub n: usize,
    pub beta: Beta,
    data: Vec<Complex64>,
}

impl DenseHermitian {
    /// Builds from the upper triangle given by `f(i, j)`, i ≤ j.
    pub fn from_upper(n: usize, beta: Beta, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let mut z = f(i, j);
                if i == j || beta == Beta::One {
                    z.im = 0.0;
                }
                data[i * n + j] = z;
                data[j * n + i] = z.conj();
            }
        }
        Self { n, beta, data }
    }

    /// Real symmetric matrix from a row-major array; only the upper triangle is read.
    pub fn from_real(n: usize, values: &[f64]) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::param("values", format!("expected {} entries, got {}", n * n, values.len())));
        }
        Ok(Self::from_upper(n, Beta::One, |i, j| Complex64::new(values[i * n + j], 0.0)))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == self.get(j, i).conj()))
    }

    /// y = M x
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let row = &self.data[i * n..(i + 1) * n];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// [M^k]_{11} for k = 0..=kmax.
    pub fn e1_power_moments(&self, kmax: usize) -> Vec<f64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.n];
        v[0] = Complex64::new(1.0, 0.0);
        let mut out = vec![1.0];
        for _ in 0..kmax {
            v = self.apply(&v);
            out.push(v[0].re);
        }
        out
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::param("n", "dimension must be at least 1"))
    } else {
        Ok(())
    }
}

fn position(i: usize, j: usize) -> EntryPosition {
    if i == j {
        EntryPosition::Diagonal
    } else {
        EntryPosition::OffDiagonal
    }
}

/// GOE (β = 1: diagonal variance 2, off-diagonal variance 1) or GUE
/// (β = 2: diagonal variance 1, E|off-diagonal|² = 1). Entries are drawn row
/// by row along the upper triangle.
pub fn sample_goe_gue(n: usize, beta: Beta, stream: &mut Stream) -> Result<DenseHermitian> {
    check_dim(n)?;
    Ok(DenseHermitian::from_upper(n, beta, |i, j| stream.gaussian_entry(beta, position(i, j))))
}

/// Wigner matrix with bounded entries whose first four moments match
/// GOE/GUE.
pub fn sample_wigner_matched(n: usize, beta: Beta, stream: &mut Stream) -> Result<DenseHermitian> {
    check_dim(n)?;
    Ok(DenseHermitian::from_upper(n, beta, |i, j| stream.four_moment_matched(beta, position(i, j))))
}

pub fn sample_dense(n: usize, beta: Beta, ensemble: Ensemble, stream: &mut Stream) -> Result<DenseHermitian> {
    match ensemble {
        Ensemble::Gaussian => sample_goe_gue(n, beta, stream),
        Ensemble::Matched => sample_wigner_matched(n, beta, stream),
        Ensemble::Tridiagonal => Err(Error::param("ensemble", "the tridiagonal model has no dense form here")),
    }
}

/// Householder reduction with enough bookkeeping to rebuild rows of the
/// unitary transform.
struct Reduction {
    tri: TridiagonalSym,
    /// (first index, v, τ) per reflector; `None` when the column was already reduced.
    reflectors: Vec<Option<(usize, Vec<Complex64>, f64)>>,
    /// Diagonal unitary making the off-diagonal real and nonnegative.
    phases: Vec<Complex64>,
}

fn reduce(m: &DenseHermitian) -> Reduction {
    let n = m.n;
    let mut a = m.data.clone();
    let mut offdiag_c = Vec::with_capacity(n.saturating_sub(1));
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let zero = Complex64::new(0.0, 0.0);
    for k in 0..n.saturating_sub(2) {
        let s = k + 1;
        let len = n - s;
        let x: Vec<Complex64> = (s..n).map(|i| a[i * n + k]).collect();
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            offdiag_c.push(x[0]);
            reflectors.push(None);
            continue;
        }
        let norm = (x[0].norm_sqr() + tail).sqrt();
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut v = x;
        v[0] -= alpha;
        let tau = 2.0 / v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        // p = τ B v on the trailing block
        let mut p = vec![zero; len];
        for (r, pr) in p.iter_mut().enumerate() {
            let row = &a[(s + r) * n + s..(s + r) * n + n];
            *pr = tau * row.iter().zip(&v).map(|(b, vi)| b * vi).sum::<Complex64>();
        }
        let vp: Complex64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let kk = 0.5 * tau * vp.re;
        let w: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| pi - kk * vi).collect();
        for r in 0..len {
            let row = &mut a[(s + r) * n + s..(s + r) * n + n];
            let (vr, wr) = (v[r], w[r]);
            for (c, entry) in row.iter_mut().enumerate() {
                *entry -= vr * w[c].conj() + wr * v[c].conj();
            }
        }
        a[s * n + k] = alpha;
        a[k * n + s] = alpha.conj();
        for i in s + 1..n {
            a[i * n + k] = zero;
            a[k * n + i] = zero;
        }
        offdiag_c.push(alpha);
        reflectors.push(Some((s, v, tau)));
    }
    if n >= 2 {
        offdiag_c.push(a[(n - 1) * n + n - 2]);
    }
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut phases = Vec::with_capacity(n);
    phases.push(Complex64::new(1.0, 0.0));
    for (k, e) in offdiag_c.iter().enumerate() {
        let r = e.norm();
        let next = if r > 0.0 { phases[k] * (e / r) } else { phases[k] };
        phases.push(next);
    }
    let offdiag = offdiag_c.iter().map(|e| e.norm()).collect();
    Reduction {
        tri: TridiagonalSym {
            diag,
            offdiag,
            source_dim: n,
        },
        reflectors,
        phases,
    }
}

/// Unitary reduction to real tridiagonal form by Householder reflections
/// that fix e₁, followed by a diagonal phase change making the off-diagonal
/// nonnegative. The spectral measure at e₁ is unchanged.
pub fn householder_tridiagonalize(m: &DenseHermitian) -> Result<TridiagonalSym> {
    if m.n < 2 {
        return Err(Error::param("n", "tridiagonalization needs n >= 2"));
    }
    Ok(reduce(m).tri)
}

/// Leading `steps`×`steps` block of the tridiagonal form of `m`, built by
/// Lanczos from e₁ with full reorthogonalization. Stops early if the Krylov
/// space is exhausted, in which case the block is the whole Jacobi matrix of
/// the spectral measure at e₁.
pub fn lanczos_e1(m: &DenseHermitian, steps: usize) -> Result<TridiagonalSym> {
    check_dim(m.n)?;
    let n = m.n;
    let steps = steps.clamp(1, n);
    let zero = Complex64::new(0.0, 0.0);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(steps);
    let mut q = vec![zero; n];
    q[0] = Complex64::new(1.0, 0.0);
    let mut diag = Vec::with_capacity(steps);
    let mut offdiag = Vec::with_capacity(steps);
    loop {
        let mut w = m.apply(&q);
        diag.push(q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum::<Complex64>().re);
        basis.push(q);
        if basis.len() == steps {
            break;
        }
        for _ in 0..2 {
            for b in &basis {
                let c: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let beta = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let scale = diag.iter().fold(0.0f64, |s, d| s.max(d.abs())).max(1.0);
        if beta <= 1e-13 * scale {
            break;
        }
        offdiag.push(beta);
        q = w.into_iter().map(|z| z / beta).collect();
    }
    Ok(TridiagonalSym {
        diag,
        offdiag,
        source_dim: n,
    })
}

/// Incremental Dumitriu–Edelman sampler. Row i (0-based) draws its diagonal
/// entry N(0, 2/β) and then its off-diagonal χ(β(n−1−i))/√β, so parameter
/// n − 1 sits next to the (1,1) corner. Because draws are sequential, a
/// leading block is an exact prefix of the full matrix for the same stream.
#[derive(Debug, Clone)]
pub struct DumitriuEdelman {
    n: usize,
    beta: f64,
    stream: Stream,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl DumitriuEdelman {
    pub fn new(n: usize, beta: f64, stream: Stream) -> Result<Self> {
        check_dim(n)?;
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::param("beta", format!("must be positive, got {beta}")));
        }
        Ok(Self {
            n,
            beta,
            stream,
            diag: Vec::new(),
            offdiag: Vec::new(),
        })
    }

    pub fn rows(&self) -> usize {
        self.diag.len()
    }

    /// Draws rows until `rows` are available (capped at n).
    pub fn extend_to(&mut self, rows: usize) -> Result<()> {
        let rows = rows.min(self.n);
        let sd = (2.0 / self.beta).sqrt();
        let scale = self.beta.sqrt().recip();
        while self.diag.len() < rows {
            let i = self.diag.len();
            self.diag.push(sd * self.stream.gaussian());
            if i + 1 < self.n {
                let b = self.stream.chi(self.beta * (self.n - 1 - i) as f64)?;
                self.offdiag.push(scale * b);
            }
        }
        Ok(())
    }

    /// The stream positioned after the last drawn entry.
    pub fn into_stream(self) -> Stream {
        self.stream
    }

    /// Leading block with the rows drawn so far.
    pub fn block(&self) -> TridiagonalSym {
        let k = self.diag.len();
        TridiagonalSym {
            diag: self.diag.clone(),
            offdiag: self.offdiag[..k.saturating_sub(1)].to_vec(),
            source_dim: self.n,
        }
    }
}

/// Full n×n Dumitriu–Edelman matrix.
pub fn sample_dumitriu_edelman(n: usize, beta: f64, stream: &mut Stream) -> Result<TridiagonalSym> {
    sample_dumitriu_edelman_leading(n, n, beta, stream)
}

/// Leading `rows`×`rows` block of an n×n Dumitriu–Edelman matrix; equal to
/// `sample_dumitriu_edelman(n, ..).leading(rows)` for the same stream.
pub fn sample_dumitriu_edelman_leading(n: usize, rows: usize, beta: f64, stream: &mut Stream) -> Result<TridiagonalSym> {
    let mut de = DumitriuEdelman::new(n, beta, stream.clone())?;
    de.extend_to(rows.max(1))?;
    let block = de.block();
    *stream = de.into_stream();
    Ok(block)
}

/// Eigenvalues and selected eigenvector coordinate rows of a dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FullSpectrum {
    pub n: usize,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Requested coordinate indices (0-based).
    pub rows: Vec<usize>,
    /// `coords[r][j]` = z_{rows[r]}^j, coordinate of eigenvector j.
    pub coords: Vec<Vec<Complex64>>,
}

impl FullSpectrum {
    pub fn row(&self, a: usize) -> Option<&[Complex64]> {
        self.rows.iter().position(|&r| r == a).map(|i| self.coords[i].as_slice())
    }
}

pub fn full_eigen(m: &DenseHermitian, rows: &[usize]) -> Result<FullSpectrum> {
    full_eigen_with_cap(m, rows, DENSE_CAP)
}

/// Full eigendecomposition: Householder reduction, then QL with the
/// rotations applied to the requested rows of the reduction's unitary.
pub fn full_eigen_with_cap(m: &DenseHermitian, rows: &[usize], cap: usize) -> Result<FullSpectrum> {
    let n = m.n;
    if n > cap {
        return Err(Error::SizeCap { n, cap });
    }
    check_dim(n)?;
    if let Some(&a) = rows.iter().find(|&&a| a >= n) {
        return Err(Error::param("rows", format!("index {a} out of range for n = {n}")));
    }
    let red = reduce(m);
    // Rows of Q·D, with Q = H_0 H_1 ⋯ .
    let zero = Complex64::new(0.0, 0.0);
    let mut re_rows = Vec::with_capacity(rows.len());
    let mut im_rows = Vec::with_capacity(rows.len());
    for &a in rows {
        let mut r = vec![zero; n];
        r[a] = Complex64::new(1.0, 0.0);
        for (s, v, tau) in red.reflectors.iter().flatten() {
            let rv: Complex64 = r[*s..].iter().zip(v).map(|(x, y)| x * y).sum();
            for (x, y) in r[*s..].iter_mut().zip(v) {
                *x -= tau * rv * y.conj();
            }
        }
        for (x, d) in r.iter_mut().zip(&red.phases) {
            *x *= d;
        }
        re_rows.push(r.iter().map(|z| z.re).collect::<Vec<f64>>());
        im_rows.push(r.iter().map(|z| z.im).collect::<Vec<f64>>());
    }
    let mut d = red.tri.diag.clone();
    let mut e = red.tri.offdiag.clone();
    e.push(0.0);
    ql_implicit(&mut d, &mut e, |i, c, s| {
        for z in re_rows.iter_mut().chain(im_rows.iter_mut()) {
            crate::tridiag::rotate_row(z, i, c, s);
        }
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[y].total_cmp(&d[x]));
    let eigenvalues = order.iter().map(|&j| d[j]).collect();
    let coords = re_rows
        .iter()
        .zip(&im_rows)
        .map(|(re, im)| order.iter().map(|&j| Complex64::new(re[j], im[j])).collect())
        .collect();
    Ok(FullSpectrum {
        n,
        eigenvalues,
        rows: rows.to_vec(),
        coords,
    })
}

/// Spectral measure at e₁ of a dense matrix through its full Householder form.
pub fn dense_spectral_at_e1(m: &DenseHermitian) -> Result<SpectralMeasureAtE1> {
    if m.n == 1 {
        return Ok(SpectralMeasureAtE1 {
            n: 1,
            eigenvalues: vec![m.get(0, 0).re],
            weights: vec![1.0],
        });
    }
    spectral_at_e1(&householder_tridiagonalize(m)?)
}

/// m = ⌊α n^{2/3}⌋, guarded against round-off at exact integers.
pub fn edge_exponent(n: usize, alpha: f64) -> usize {
    (alpha * (n as f64).powf(2.0 / 3.0) + 1e-9).floor() as usize
}

/// Value of a power functional with a flag raised when a term had to be
/// saturated at the floating-point ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub value: f64,
    pub saturated: bool,
}

/// ln of the largest power magnitude evaluated directly; leaves room for the
/// (1 + x) factor and a sum over n terms.
const POWER_LOG_CEILING: f64 = 700.0;

/// x^{2m}(1 + x). The magnitude is checked in log-space first; in range, the
/// even power is evaluated directly.
pub fn edge_power(x: f64, m: usize) -> (f64, bool) {
    let k = 2 * m;
    if k == 0 {
        return (1.0 + x, false);
    }
    let ax = x.abs();
    if ax == 0.0 {
        return (0.0, false);
    }
    if k as f64 * ax.ln() > POWER_LOG_CEILING {
        return (f64::MAX.copysign(1.0 + x), true);
    }
    let p = if k <= i32::MAX as usize {
        ax.powi(k as i32)
    } else {
        ax.powf(k as f64)
    };
    (p * (1.0 + x), false)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::param("alpha", format!("must be positive, got {alpha}")))
    }
}

fn weighted_edge_sum<'a>(n: usize, alpha: f64, atoms: impl Iterator<Item = (f64, f64)> + 'a) -> FunctionalValue {
    let m = edge_exponent(n, alpha);
    let scale = 2.0 * (n as f64).sqrt();
    let mut saturated = false;
    let mut sum = 0.0;
    for (lambda, w) in atoms {
        let (p, sat) = edge_power(lambda / scale, m);
        saturated |= sat;
        sum += w * p;
    }
    if !sum.is_finite() {
        saturated = true;
        sum = f64::MAX.copysign(sum);
    }
    FunctionalValue { value: sum, saturated }
}

/// (n/β) Σ_j p_j (x_j^{2m} + x_j^{2m+1}), x_j = λ_j / (2√n), n the source dimension.
pub fn moment_functional_11(spec: &SpectralMeasureAtE1, alpha: f64, beta: f64) -> Result<FunctionalValue> {
    check_alpha(alpha)?;
    if !(beta > 0.0) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    let atoms = spec.eigenvalues.iter().copied().zip(spec.weights.iter().copied());
    let mut v = weighted_edge_sum(spec.n, alpha, atoms);
    v.value *= spec.n as f64 / beta;
    Ok(v)
}

/// Complex counterpart of [`FunctionalValue`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexFunctionalValue {
    pub value: Complex64,
    pub saturated: bool,
}

/// (n/2) Σ_j z_a^j conj(z_b^j) (x_j^{2m} + x_j^{2m+1}).
pub fn matrix_element_functional(spec: &FullSpectrum, a: usize, b: usize, alpha: f64) -> Result<ComplexFunctionalValue> {
    check_alpha(alpha)?;
    let missing = |i| Error::param("rows", format!("coordinate row {i} was not computed"));
    let za = spec.row(a).ok_or_else(|| missing(a))?;
    let zb = spec.row(b).ok_or_else(|| missing(b))?;
    let m = edge_exponent(spec.n, alpha);
    let scale = 2.0 * (spec.n as f64).sqrt();
    let mut saturated = false;
    let mut sum = Complex64::new(0.0, 0.0);
    for ((l, x), y) in spec.eigenvalues.iter().zip(za).zip(zb) {
        let (p, sat) = edge_power(l / scale, m);
        saturated |= sat;
        sum += x * y.conj() * p;
    }
    Ok(ComplexFunctionalValue {
        value: sum * (spec.n as f64 / 2.0),
        saturated,
    })
}

/// (1/2) Σ_j (x_j^{2m} + x_j^{2m+1}) over the whole spectrum.
pub fn trace_functional(spec: &FullSpectrum, alpha: f64) -> Result<FunctionalValue> {
    trace_functional_of(&spec.eigenvalues, spec.n, alpha)
}

/// [`trace_functional`] from a bare eigenvalue list of an n×n matrix.
pub fn trace_functional_of(eigenvalues: &[f64], n: usize, alpha: f64) -> Result<FunctionalValue> {
    check_alpha(alpha)?;
    let mut v = weighted_edge_sum(n, alpha, eigenvalues.iter().map(|&l| (l, 1.0)));
    v.value *= 0.5;
    Ok(v)
}

/// [M^k]_{11} by brute-force summation over index paths 1 → i₁ → … → 1.
pub fn path_sum_oracle(m: &DenseHermitian, k: usize) -> Result<Complex64> {
    let n = m.n;
    if k == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let paths = (n as f64).powi(k as i32 - 1);
    if paths > PATH_SUM_LIMIT {
        return Err(Error::PathSumTooLarge {
            paths,
            limit: PATH_SUM_LIMIT,
        });
    }
    let inner = k - 1;
    let mut idx = vec![0usize; inner];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let mut prod = Complex64::new(1.0, 0.0);
        let mut prev = 0;
        for &i in &idx {
            prod *= m.get(prev, i);
            prev = i;
        }
        total += prod * m.get(prev, 0);
        // odometer
        let mut pos = 0;
        loop {
            if pos == inner {
                return Ok(total);
            }
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// One draw of the (1,1) functional from the tridiagonal model, using only
/// the leading m + 2 rows.
pub fn tridiagonal_functional_sample(n: usize, beta: f64, alpha: f64, stream: &mut Stream) -> Result<FunctionalValue> {
    check_alpha(alpha)?;
    let m = edge_exponent(n, alpha);
    let block = sample_dumitriu_edelman_leading(n, m + 2, beta, stream)?;
    moment_functional_11(&spectral_at_e1(&block)?, alpha, beta)
}

/// One draw of the (1,1) functional from a dense Gaussian or matched Wigner
/// matrix, through m + 2 Lanczos steps from e₁.
pub fn dense_functional_sample(
    n: usize,
    beta: Beta,
    ensemble: Ensemble,
    alpha: f64,
    stream: &mut Stream,
) -> Result<FunctionalValue> {
    check_alpha(alpha)?;
    let mat = sample_dense(n, beta, ensemble, stream)?;
    let m = edge_exponent(n, alpha);
    let block = lanczos_e1(&mat, m + 2)?;
    moment_functional_11(&spectral_at_e1(&block)?, alpha, beta.value())
}
