//! Numerical laboratory for the random-matrix / KPZ one-point identities.
//!
//! Both sides of each identity are computed independently:
//!
//! * [`matrix`]: Gaussian, four-moment-matched and tridiagonal β-ensembles, the
//!   spectral measure at the first basis vector, and the rescaled high-power
//!   functionals `(n/β)[(M/2√n)^{2m} + (M/2√n)^{2m+1}]_{11}`.
//! * [`airy_process`]: edge-rescaled Airy_β configurations with rank-one
//!   Gaussian decorations and the resulting exponential sums.
//! * [`fredholm`]: Nyström evaluation of Airy-kernel Fredholm determinants
//!   (Tracy–Widom F₂, the β = 2 Laplace transform) and the β = 1 product by
//!   Monte Carlo.
//! * [`excursion`]: the Brownian-excursion partition function driven by a
//!   one-dimensional white noise.
//! * [`stats`]: two-sample KS, bootstrap Laplace bands, moment checks and the
//!   verification battery tying everything together.

pub mod airy_process;
pub mod error;
pub mod excursion;
pub mod fredholm;
pub mod matrix;
pub mod quadrature;
pub mod replicas;
pub mod rng;
pub mod special;
pub mod stats;
pub mod tridiag;

mod dd;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use rng::{SeedSpec, Stream};

/// Dyson index of the Gaussian ensembles handled by the dense path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Beta {
    One,
    Two,
}

impl Beta {
    pub fn value(self) -> f64 {
        match self {
            Beta::One => 1.0,
            Beta::Two => 2.0,
        }
    }

    /// Accepts exactly 1 or 2.
    pub fn from_f64(beta: f64) -> Result<Self> {
        if beta == 1.0 {
            Ok(Beta::One)
        } else if beta == 2.0 {
            Ok(Beta::Two)
        } else {
            Err(Error::param("beta", format!("expected 1 or 2, got {beta}")))
        }
    }
}

/// Target of the first-moment identity,
/// `E Z(2α³, 0) e^{α³/12} = ∫ e^{αλ} K_Ai(λ, λ) dλ = e^{α³/12} / (2α√(πα))`.
pub fn heat_kernel_mean(alpha: f64) -> f64 {
    (alpha.powi(3) / 12.0).exp() / (2.0 * alpha * (std::f64::consts::PI * alpha).sqrt())
}
