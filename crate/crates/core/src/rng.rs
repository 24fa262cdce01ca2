//! Reproducible, stream-splittable random numbers.
//!
//! Every Monte Carlo replica owns a [`Stream`] built from a [`SeedSpec`]. The
//! bit generator is ChaCha8 keyed by the master seed with the replica index as
//! its native stream number, so replicas never share state and the output of
//! replica `r` does not depend on which thread ran it or in what order.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Beta;

/// Identifies one random stream: a master seed plus a replica/task index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Same master seed, another replica index.
    pub fn with_stream(self, stream_id: u64) -> Self {
        Self {
            stream_id,
            ..self
        }
    }

    /// A statistically unrelated seed family labelled by `tag`. Used to give the
    /// sub-tasks of one replica (points, decorations, noise, ...) disjoint streams.
    pub fn derive(self, tag: u64) -> Self {
        Self {
            master_seed: splitmix64(self.master_seed ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d))),
            stream_id: self.stream_id,
        }
    }

    pub fn stream(self) -> Stream {
        Stream::new(self)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Position of a Wigner matrix entry; fixes the entry variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryPosition {
    Diagonal,
    OffDiagonal,
}

/// A single random stream with the elementary samplers used by the crate.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: SeedSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.master_seed);
        rng.set_stream(seed.stream_id);
        Self { rng }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on (0, 1], safe to take the logarithm of.
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Standard normal variate.
    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Gamma(shape, scale 1) by Marsaglia–Tsang rejection; shapes below one are
    /// boosted through `Gamma(shape + 1) * U^(1/shape)`.
    pub fn gamma(&mut self, shape: f64) -> Result<f64> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::param("shape", format!("must be positive and finite, got {shape}")));
        }
        if shape < 1.0 {
            let boost = self.uniform_open0().powf(1.0 / shape);
            return Ok(self.gamma_unit_or_more(shape + 1.0) * boost);
        }
        Ok(self.gamma_unit_or_more(shape))
    }

    fn gamma_unit_or_more(&mut self, shape: f64) -> f64 {
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.gaussian();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.uniform_open0();
            if u.ln() < 0.5 * x * x + d - d * v + d * v.ln() {
                return d * v;
            }
        }
    }

    /// Chi-squared with `k` degrees of freedom.
    pub fn chi_squared(&mut self, k: f64) -> Result<f64> {
        self.gamma(0.5 * k)
            .map(|g| 2.0 * g)
            .map_err(|_| Error::param("k", format!("degrees of freedom must be positive, got {k}")))
    }

    /// χ-distributed variate with parameter `a`: the square root of a
    /// Gamma(a/2, scale 2) variate.
    pub fn chi(&mut self, a: f64) -> Result<f64> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::param("a", format!("chi parameter must be positive, got {a}")));
        }
        Ok(self.chi_squared(a)?.sqrt())
    }

    /// Bounded symmetric variate with the first four moments of N(0,1):
    /// ±√3 with probability 1/6 each, 0 with probability 2/3.
    pub fn matched_unit(&mut self) -> f64 {
        match self.below(6) {
            0 => -SQRT_3,
            1 => SQRT_3,
            _ => 0.0,
        }
    }

    /// A four-moment-matched entry carrying the GOE/GUE variance of `position`.
    /// Complex entries use independent real and imaginary parts scaled by 1/√2.
    pub fn four_moment_matched(&mut self, beta: Beta, position: EntryPosition) -> Complex64 {
        match (beta, position) {
            (Beta::One, EntryPosition::Diagonal) => Complex64::new(std::f64::consts::SQRT_2 * self.matched_unit(), 0.0),
            (Beta::One, EntryPosition::OffDiagonal) => Complex64::new(self.matched_unit(), 0.0),
            (Beta::Two, EntryPosition::Diagonal) => Complex64::new(self.matched_unit(), 0.0),
            (Beta::Two, EntryPosition::OffDiagonal) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                Complex64::new(s * self.matched_unit(), s * self.matched_unit())
            }
        }
    }

    /// Gaussian entry with the GOE/GUE variance of `position`.
    pub fn gaussian_entry(&mut self, beta: Beta, position: EntryPosition) -> Complex64 {
        match (beta, position) {
            (Beta::One, EntryPosition::Diagonal) => Complex64::new(std::f64::consts::SQRT_2 * self.gaussian(), 0.0),
            (Beta::One, EntryPosition::OffDiagonal) => Complex64::new(self.gaussian(), 0.0),
            (Beta::Two, EntryPosition::Diagonal) => Complex64::new(self.gaussian(), 0.0),
            (Beta::Two, EntryPosition::OffDiagonal) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                Complex64::new(s * self.gaussian(), s * self.gaussian())
            }
        }
    }
}

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn gaussian_moments() {
        let mut s = SeedSpec::new(11, 0).stream();
        let xs: Vec<f64> = (0..1_000_000).map(|_| s.gaussian()).collect();
        let (m, v) = mean_var(&xs);
        assert!(m.abs() < 4.0 / 1000.0, "mean {m}");
        assert!((v - 1.0).abs() < 0.01, "variance {v}");
    }

    #[test]
    fn replay_is_bitwise() {
        let draw = |seed: SeedSpec| {
            let mut s = seed.stream();
            (0..64)
                .map(|i| match i % 3 {
                    0 => s.gaussian(),
                    1 => s.chi(2.5).unwrap(),
                    _ => s.matched_unit(),
                })
                .map(f64::to_bits)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(SeedSpec::new(1, 0)), draw(SeedSpec::new(1, 0)));
        assert_ne!(draw(SeedSpec::new(1, 0)), draw(SeedSpec::new(1, 1)));
        assert_ne!(draw(SeedSpec::new(1, 0)), draw(SeedSpec::new(1, 0).derive(3)));
    }

    #[test]
    fn streams_are_uncorrelated() {
        let n = 200_000;
        let mut a = SeedSpec::new(5, 0).stream();
        let mut b = SeedSpec::new(5, 1).stream();
        let c: f64 = (0..n).map(|_| a.gaussian() * b.gaussian()).sum::<f64>() / n as f64;
        assert!(c.abs() < 4.0 / (n as f64).sqrt(), "cross moment {c}");
    }

    #[test]
    fn chi_second_moment_matches_parameter() {
        for &a in &[0.5, 1.0, 2.0, 3.0, 10.0] {
            let mut s = SeedSpec::new(2, 7).stream();
            let xs: Vec<f64> = (0..100_000).map(|_| s.chi(a).unwrap().powi(2)).collect();
            let (m, v) = mean_var(&xs);
            let se = (v / xs.len() as f64).sqrt();
            assert!((m - a).abs() < 4.0 * se, "a = {a}: mean {m}, se {se}");
        }
    }

    #[test]
    fn chi_concentrates_for_large_parameter() {
        let a = 1e4;
        let mut s = SeedSpec::new(3, 0).stream();
        let ratios: Vec<f64> = (0..1000).map(|_| s.chi(a).unwrap() / a.sqrt()).collect();
        let (m, v) = mean_var(&ratios);
        assert!((m - 1.0).abs() < 0.02, "mean ratio {m}");
        // sd of chi(a) tends to 1/sqrt(2)
        assert!((v.sqrt() * a.sqrt() - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.05);
    }

    #[test]
    fn chi_rejects_nonpositive() {
        let mut s = SeedSpec::new(0, 0).stream();
        assert!(s.chi(0.0).is_err());
        assert!(s.chi(-1.0).is_err());
        assert!(s.chi(f64::NAN).is_err());
    }

    #[test]
    fn matched_moments_are_gaussian() {
        // Exact: E x^2 = 2 * (1/6) * 3 = 1, E x^4 = 2 * (1/6) * 9 = 3, odd moments vanish.
        let support = [(-SQRT_3, 1.0 / 6.0), (0.0, 2.0 / 3.0), (SQRT_3, 1.0 / 6.0)];
        let moment = |k: i32| support.iter().map(|(x, p)| p * x.powi(k)).sum::<f64>();
        assert!((moment(2) - 1.0).abs() < 1e-15);
        assert!((moment(4) - 3.0).abs() < 1e-14);
        for k in [1, 3, 5] {
            assert!(moment(k).abs() < 1e-15);
        }
        let mut s = SeedSpec::new(9, 0).stream();
        let n = 600_000;
        let xs: Vec<f64> = (0..n).map(|_| s.matched_unit()).collect();
        let (m, v) = mean_var(&xs);
        assert!(m.abs() < 4.0 / (n as f64).sqrt());
        assert!((v - 1.0).abs() < 0.01);
    }

    #[test]
    fn matched_entries_are_bounded() {
        let mut s = SeedSpec::new(4, 0).stream();
        for _ in 0..10_000 {
            let d = s.four_moment_matched(Beta::One, EntryPosition::Diagonal);
            assert!(d.norm() <= SQRT_3 * std::f64::consts::SQRT_2 + 1e-15);
            let o = s.four_moment_matched(Beta::Two, EntryPosition::OffDiagonal);
            assert!(o.re.abs() <= SQRT_3 / std::f64::consts::SQRT_2 + 1e-15);
        }
    }
}
