//! Symmetric tridiagonal matrices and their spectral measure at e₁.
//!
//! The eigensolver is the implicit QL iteration with Wilkinson-type shifts.
//! Rotations are handed to a callback so callers decide how much of the
//! eigenvector matrix to accumulate: nothing, only its first row
//! (Golub–Welsch), or a few selected rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix with nonnegative off-diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalSym {
    /// a(1), …, a(n)
    pub diag: Vec<f64>,
    /// b(1), …, b(n−1); entry i couples rows i and i+1.
    pub offdiag: Vec<f64>,
    /// Dimension of the matrix this one was cut from, which fixes the edge
    /// scaling of functionals. Equal to `diag.len()` unless built as a
    /// leading block.
    pub source_dim: usize,
}

impl TridiagonalSym {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::param("diag", "empty matrix"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::param(
                "offdiag",
                format!("expected {} entries, got {}", diag.len() - 1, offdiag.len()),
            ));
        }
        if let Some(b) = offdiag.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
            return Err(Error::param("offdiag", format!("entries must be finite and nonnegative, got {b}")));
        }
        if let Some(a) = diag.iter().find(|a| !a.is_finite()) {
            return Err(Error::param("diag", format!("entries must be finite, got {a}")));
        }
        let source_dim = diag.len();
        Ok(Self {
            diag,
            offdiag,
            source_dim,
        })
    }

    /// Constant diagonal `a` and off-diagonal `b`.
    pub fn toeplitz(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a; n], vec![b; n.saturating_sub(1)])
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Leading k×k block, keeping `source_dim`. The moments [T^j]_{11} for
    /// j ≤ 2k − 1 of the block equal those of the full matrix.
    pub fn leading(&self, k: usize) -> Self {
        let k = k.clamp(1, self.dim());
        Self {
            diag: self.diag[..k].to_vec(),
            offdiag: self.offdiag[..k - 1].to_vec(),
            source_dim: self.source_dim,
        }
    }

    /// y = T x
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.offdiag[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.offdiag[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// [T^k]_{11} for k = 0..=kmax by repeated multiplication of e₁.
    pub fn e1_power_moments(&self, kmax: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        v[0] = 1.0;
        let mut out = Vec::with_capacity(kmax + 1);
        out.push(1.0);
        for _ in 0..kmax {
            v = self.apply(&v);
            out.push(v[0]);
        }
        out
    }
}

/// Eigenvalues (descending) of a tridiagonal matrix and the squared first
/// coordinates of the matching normalized eigenvectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasureAtE1 {
    /// Dimension of the source matrix (scaling), not the number of atoms.
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralMeasureAtE1 {
    /// Σ p_j λ_j^k
    pub fn moment(&self, k: i32) -> f64 {
        self.eigenvalues.iter().zip(&self.weights).map(|(l, p)| p * l.powi(k)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Implicit QL on diagonal `d` and off-diagonal `e` (`e.len() == d.len()`,
/// last entry is scratch). On return `d` holds the unsorted eigenvalues.
/// `rotate(i, c, s)` is called for every plane rotation acting on columns
/// i and i + 1 of the eigenvector matrix.
pub(crate) fn ql_implicit(d: &mut [f64], e: &mut [f64], mut rotate: impl FnMut(usize, f64, f64)) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let cap = 30 * n;
    let mut total = 0usize;
    for l in 0..n {
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            total += 1;
            if total > cap {
                return Err(Error::NoConvergence { block: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = norm2(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = norm2(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                rotate(i, c, s);
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// √(a² + b²); `hypot` only when the direct form over- or underflows.
#[inline]
fn norm2(a: f64, b: f64) -> f64 {
    let r = (a * a + b * b).sqrt();
    if r.is_finite() && r > 1e-150 {
        r
    } else {
        a.hypot(b)
    }
}

/// Applies a QL rotation to columns i, i+1 of a row vector.
#[inline]
pub(crate) fn rotate_row(z: &mut [f64], i: usize, c: f64, s: f64) {
    let f = z[i + 1];
    z[i + 1] = s * z[i] + c * f;
    z[i] = c * z[i] - s * f;
}

fn work_arrays(t: &TridiagonalSym) -> (Vec<f64>, Vec<f64>) {
    let mut e = t.offdiag.clone();
    e.push(0.0);
    (t.diag.clone(), e)
}

/// All eigenvalues, descending. O(n²) time, O(n) memory.
pub fn eigenvalues(t: &TridiagonalSym) -> Result<Vec<f64>> {
    let (mut d, mut e) = work_arrays(t);
    ql_implicit(&mut d, &mut e, |_, _, _| {})?;
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

const LANES: usize = 8;

/// Sturm data for bisection: squared off-diagonal, pivot floor and a bound
/// on the spectral radius.
struct Sturm<'a> {
    d: &'a [f64],
    e2: Vec<f64>,
    pivmin: f64,
    lo: f64,
    hi: f64,
}

impl<'a> Sturm<'a> {
    fn new(t: &'a TridiagonalSym) -> Self {
        let e2: Vec<f64> = t.offdiag.iter().map(|b| b * b).collect();
        let pivmin = f64::MIN_POSITIVE * e2.iter().fold(1.0f64, |m, &x| m.max(x));
        // Gershgorin
        let n = t.dim();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let r = if i > 0 { t.offdiag[i - 1] } else { 0.0 } + if i + 1 < n { t.offdiag[i] } else { 0.0 };
            lo = lo.min(t.diag[i] - r);
            hi = hi.max(t.diag[i] + r);
        }
        Self {
            d: &t.diag,
            e2,
            pivmin,
            lo,
            hi,
        }
    }

    /// Number of eigenvalues below each shift, from the signs of the LDLᵀ
    /// pivots of T − x. The lanes are independent chains, which keeps the
    /// divisions pipelined.
    fn counts_below(&self, xs: &[f64; LANES]) -> [usize; LANES] {
        let mut q = [0.0; LANES];
        let mut c = [0usize; LANES];
        for l in 0..LANES {
            let v = self.d[0] - xs[l];
            q[l] = if v.abs() < self.pivmin { -self.pivmin } else { v };
            c[l] = (q[l] < 0.0) as usize;
        }
        for i in 1..self.d.len() {
            let (di, e2) = (self.d[i], self.e2[i - 1]);
            for l in 0..LANES {
                let v = di - xs[l] - e2 / q[l];
                q[l] = if v.abs() < self.pivmin { -self.pivmin } else { v };
                c[l] += (q[l] < 0.0) as usize;
            }
        }
        c
    }

    fn count_below(&self, x: f64) -> usize {
        self.counts_below(&[x; LANES])[0]
    }

    /// Eigenvalues with ascending ranks `ranks` (0 = smallest), each known to
    /// lie in (lo, hi].
    fn bisect(&self, ranks: &[usize], lo: f64, hi: f64) -> Vec<f64> {
        let tol = 2.0 * f64::EPSILON * self.lo.abs().max(self.hi.abs()).max(f64::MIN_POSITIVE);
        let mut out = Vec::with_capacity(ranks.len());
        for chunk in ranks.chunks(LANES) {
            let mut a = [lo; LANES];
            let mut b = [hi; LANES];
            for _ in 0..200 {
                if (0..chunk.len()).all(|l| b[l] - a[l] <= tol) {
                    break;
                }
                let mut mid = [0.0; LANES];
                for l in 0..LANES {
                    mid[l] = 0.5 * (a[l] + b[l]);
                }
                let c = self.counts_below(&mid);
                for (l, &rank) in chunk.iter().enumerate() {
                    if b[l] - a[l] <= tol {
                        continue;
                    }
                    // at least rank + 1 eigenvalues below mid: target is below mid
                    if c[l] > rank {
                        b[l] = mid[l];
                    } else {
                        a[l] = mid[l];
                    }
                }
            }
            out.extend((0..chunk.len()).map(|l| 0.5 * (a[l] + b[l])));
        }
        out
    }
}

/// Number of eigenvalues strictly below `x`.
pub fn count_below(t: &TridiagonalSym, x: f64) -> usize {
    Sturm::new(t).count_below(x)
}

/// Eigenvalues above `level`, descending, by Sturm-sequence bisection.
/// Cheaper than [`eigenvalues`] when few eigenvalues are wanted.
pub fn eigenvalues_above(t: &TridiagonalSym, level: f64) -> Vec<f64> {
    let st = Sturm::new(t);
    let n = t.dim();
    let below = st.count_below(level);
    let ranks: Vec<usize> = (below..n).rev().collect();
    let hi = st.hi + 2.0 * st.pivmin.sqrt().max(f64::EPSILON * st.hi.abs());
    st.bisect(&ranks, level, hi)
}

/// The k largest eigenvalues, descending, by Sturm-sequence bisection.
pub fn largest_eigenvalues(t: &TridiagonalSym, k: usize) -> Vec<f64> {
    let st = Sturm::new(t);
    let n = t.dim();
    let k = k.min(n);
    let ranks: Vec<usize> = (n - k..n).rev().collect();
    let pad = f64::EPSILON * st.lo.abs().max(st.hi.abs()) + st.pivmin.sqrt();
    st.bisect(&ranks, st.lo - pad, st.hi + pad)
}

/// Spectral measure of `t` at e₁: eigenvalues with the squared first
/// eigenvector coordinates, accumulating only the first row of the
/// eigenvector matrix.
pub fn spectral_at_e1(t: &TridiagonalSym) -> Result<SpectralMeasureAtE1> {
    let (mut d, mut e) = work_arrays(t);
    let n = d.len();
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    ql_implicit(&mut d, &mut e, |i, c, s| rotate_row(&mut z, i, c, s))?;
    let mut atoms: Vec<(f64, f64)> = d.into_iter().zip(z.into_iter().map(|x| x * x)).collect();
    sort_atoms(&mut atoms);
    let (eigenvalues, weights) = atoms.into_iter().unzip();
    Ok(SpectralMeasureAtE1 {
        n: t.source_dim,
        eigenvalues,
        weights,
    })
}

/// Descending eigenvalue, ties by descending weight.
pub(crate) fn sort_atoms(atoms: &mut [(f64, f64)]) {
    atoms.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
}
