//! Covariance kernels with regularly varying decay.
//!
//! Families:
//! * `Cauchy`: K(r) = (1 + r^2)^(-alpha/2), index alpha in (0, d), K(0) = 1.
//! * `Riesz`: K(r) = r^-alpha, singular at 0; capacity computations only.
//! * `LogCorrelated` (d = 2): K = q * q with q(x) ~ x^-1 (log x)^-(gamma+1)/2,
//!   normalized so K(r) (log r)^gamma -> 1. Index alpha = 0.
//! * `Custom`: an arbitrary isotropic evaluator supplied by the caller.
//!
//! Config-file grammar for a kernel block (TOML section `[kernel]`):
//!
//! ```text
//! [kernel]
//! family = "cauchy" | "riesz" | "log"
//! alpha = 0.5          # cauchy/riesz
//! gamma = 1.0          # log family only
//! dim = 2
//! join_radius = 2.0    # log family only, >= 2
//! ```
//!
//! Kernels are immutable and `Send + Sync`; every evaluation is a pure
//! function of `(kernel, r)`.

mod conv;
mod logq;
mod mixture;
mod moving_average;
mod spline;

pub use logq::{LogKernelTable, LogProfile};
pub use mixture::ScaleMixture;
pub use moving_average::MovingAverageKernel;
#[allow(unused_imports)]
pub(crate) use spline::CubicSpline;

use crate::error::{Error, Result};
use crate::special::ln_gamma;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum KernelFamily {
    Cauchy,
    Riesz,
    LogCorrelated,
    Custom,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KernelFamily::Cauchy => "cauchy",
            KernelFamily::Riesz => "riesz",
            KernelFamily::LogCorrelated => "log",
            KernelFamily::Custom => "custom",
        };
        f.write_str(s)
    }
}

#[derive(Clone)]
enum Eval {
    Cauchy { alpha: f64 },
    Riesz { alpha: f64 },
    Log(Arc<LogKernelTable>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// An isotropic positive-definite covariance kernel, evaluated as a function
/// of the Euclidean distance.
#[derive(Clone)]
pub struct Kernel {
    pub family: KernelFamily,
    /// Regular-variation index alpha in [0, d).
    pub alpha: f64,
    /// Log exponent, present for the alpha = 0 family.
    pub gamma: Option<f64>,
    /// Ambient dimension.
    pub dim: usize,
    /// K(0); absent for the singular Riesz family.
    pub k0: Option<f64>,
    eval: Eval,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("family", &self.family)
            .field("alpha", &self.alpha)
            .field("gamma", &self.gamma)
            .field("dim", &self.dim)
            .field("k0", &self.k0)
            .finish()
    }
}

impl Kernel {
    /// Cauchy kernel K(r) = (1 + r^2)^(-alpha/2) on R^dim.
    pub fn cauchy(alpha: f64, dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::domain("dim must be >= 1"));
        }
        if !(alpha > 0.0 && alpha < dim as f64) {
            return Err(Error::Domain(format!(
                "cauchy index must satisfy 0 < alpha < dim, got alpha={alpha}, dim={dim}"
            )));
        }
        Ok(Kernel {
            family: KernelFamily::Cauchy,
            alpha,
            gamma: None,
            dim,
            k0: Some(1.0),
            eval: Eval::Cauchy { alpha },
        })
    }

    /// Riesz kernel K(r) = r^-alpha; usable for capacities only.
    pub fn riesz(alpha: f64, dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::domain("dim must be >= 1"));
        }
        if !(alpha > 0.0 && alpha < dim as f64) {
            return Err(Error::Domain(format!(
                "riesz index must satisfy 0 < alpha < dim, got alpha={alpha}, dim={dim}"
            )));
        }
        Ok(Kernel {
            family: KernelFamily::Riesz,
            alpha,
            gamma: None,
            dim,
            k0: None,
            eval: Eval::Riesz { alpha },
        })
    }

    /// Log-correlated kernel K = q * q with K(r) (log r)^gamma -> 1, built on
    /// R^2 from the explicit convolution root (see [`LogProfile`]).
    pub fn log_correlated(gamma: f64, dim: usize, join_radius: f64) -> Result<Self> {
        if dim != 2 {
            return Err(Error::domain(
                "log-correlated construction is two-dimensional (dim = 2)",
            ));
        }
        let table = LogKernelTable::build(gamma, join_radius)?;
        Ok(Kernel {
            family: KernelFamily::LogCorrelated,
            alpha: 0.0,
            gamma: Some(gamma),
            dim,
            k0: Some(table.k0),
            eval: Eval::Log(Arc::new(table)),
        })
    }

    /// Kernel from an arbitrary isotropic evaluator.
    pub fn custom(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        alpha: f64,
        dim: usize,
        k0: Option<f64>,
    ) -> Self {
        Kernel {
            family: KernelFamily::Custom,
            alpha,
            gamma: None,
            dim,
            k0,
            eval: Eval::Custom(Arc::new(eval)),
        }
    }

    /// Evaluate at distance `r >= 0`. The Riesz kernel returns `+inf` at 0.
    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match &self.eval {
            Eval::Cauchy { alpha } => (1.0 + r * r).powf(-alpha / 2.0),
            Eval::Riesz { alpha } => {
                if r == 0.0 {
                    f64::INFINITY
                } else {
                    r.powf(-alpha)
                }
            }
            Eval::Log(t) => t.eval(r),
            Eval::Custom(f) => f(r),
        }
    }

    /// Evaluate, turning singular points into errors.
    pub fn try_eval(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::domain("negative distance"));
        }
        if self.family == KernelFamily::Riesz && r == 0.0 {
            return Err(Error::Singularity(
                "riesz kernel is singular at r = 0".into(),
            ));
        }
        Ok(self.eval(r))
    }

    /// Whether the kernel can back a Gaussian field sampler (finite variance).
    pub fn samplable(&self) -> bool {
        self.k0.is_some()
    }

    /// Slowly varying part r^alpha K(r).
    pub fn slowly_varying_part(&self, r: f64) -> Result<f64> {
        if r <= 0.0 && self.family == KernelFamily::Riesz {
            return Err(Error::Singularity(
                "slowly varying part of riesz undefined at r = 0".into(),
            ));
        }
        if r < 0.0 {
            return Err(Error::domain("negative distance"));
        }
        Ok(r.powf(self.alpha) * self.eval(r))
    }

    /// Laplace scale-mixture representation, available for the Cauchy family.
    pub fn scale_mixture(&self) -> Result<ScaleMixture> {
        match self.family {
            KernelFamily::Cauchy => ScaleMixture::cauchy(self.alpha, self.dim),
            _ => Err(Error::domain(
                "scale-mixture representation implemented for the Cauchy family",
            )),
        }
    }

    /// Internal access to the log-kernel convolution root.
    pub fn log_profile(&self) -> Option<&LogProfile> {
        match &self.eval {
            Eval::Log(t) => Some(&t.profile),
            _ => None,
        }
    }

    /// Short identifier used in provenance records and CSV output.
    pub fn id(&self) -> String {
        match self.family {
            KernelFamily::Cauchy => format!("cauchy(alpha={},d={})", self.alpha, self.dim),
            KernelFamily::Riesz => format!("riesz(alpha={},d={})", self.alpha, self.dim),
            KernelFamily::LogCorrelated => {
                format!("log(gamma={},d={})", self.gamma.unwrap_or(f64::NAN), self.dim)
            }
            KernelFamily::Custom => format!("custom(alpha={},d={})", self.alpha, self.dim),
        }
    }
}

/// `tilde_c` constant of the Hankel-transform Tauberian theorem:
/// `2^{1-beta} Gamma(1 - beta/2 + nu/2) / Gamma(beta/2 + nu/2)`.
pub fn hankel_tauberian_constant(beta: f64, nu: f64) -> f64 {
    2.0_f64.powf(1.0 - beta)
        * (ln_gamma(1.0 - beta / 2.0 + nu / 2.0) - ln_gamma(beta / 2.0 + nu / 2.0)).exp()
}

/// Tauberian constants `(c', c'')` linking the covariance tail, the
/// convolution root tail and the spectral blow-up:
/// K(x) ~ x^-alpha L  <=>  rho(k) ~ c'' k^(alpha-d) L(1/k)  <=>
/// q(x) ~ c' x^-(d+alpha)/2 sqrt(L); for alpha = 0 (d = 2) the roles of L are
/// played by powers of the logarithm with exponent `gamma`.
pub fn tauberian_constants(dim: usize, alpha: f64, gamma: f64) -> Result<(f64, f64)> {
    let d = dim as f64;
    if !(alpha >= 0.0 && alpha < d) {
        return Err(Error::Domain(format!(
            "tauberian constants need 0 <= alpha < dim, got alpha={alpha}, dim={dim}"
        )));
    }
    if alpha == 0.0 {
        if gamma <= 0.0 {
            return Err(Error::domain("alpha = 0 requires gamma > 0"));
        }
        if dim != 2 {
            return Err(Error::domain(
                "alpha = 0 constants are defined for dim = 2",
            ));
        }
        let c2 = 2.0 * std::f64::consts::PI * gamma;
        let c1 = gamma.sqrt() / (2.0 * std::f64::consts::PI).sqrt();
        return Ok((c1, c2));
    }
    let pi = std::f64::consts::PI;
    let c2 = pi.powf(d / 2.0)
        * 2.0_f64.powf(d - alpha)
        * (ln_gamma((d - alpha) / 2.0) - ln_gamma(alpha / 2.0)).exp();
    let c1 = pi.powf(-d / 4.0)
        * (0.5 * (ln_gamma((d - alpha) / 2.0) - ln_gamma(alpha / 2.0))
            + ln_gamma((d + alpha) / 4.0)
            - ln_gamma((d - alpha) / 4.0))
        .exp();
    Ok((c1, c2))
}
