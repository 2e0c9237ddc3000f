//! Spatial moving-average roots: q with q * q = K.
//!
//! For the Cauchy family the root is q = F^{-1}[sqrt(rho)] with rho the
//! spectral density (obtained from the Laplace mixture), inverted by a
//! zeroth-order Hankel transform and tabulated radially. For the
//! log-correlated family the root is the explicit [`LogProfile`].
//! Roots are truncated at `support_radius` for sampling; the discarded
//! fraction of ||q||^2 is reported as a diagnostic.

use super::conv::radial_autoconvolution_2d;
use super::logq::LogProfile;
use super::spline::CubicSpline;
use super::{Kernel, KernelFamily};
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::special::bessel_j0;
use crate::sum::kahan_sum;

const K_MAX: f64 = 130.0;

#[derive(Clone, Debug)]
enum Profile {
    Spline(CubicSpline),
    Log(LogProfile),
}

#[derive(Clone, Debug)]
pub struct MovingAverageKernel {
    pub dim: usize,
    /// Truncation radius applied when evaluating the root.
    pub support_radius: f64,
    /// Scalar applied on top of the stored profile.
    pub normalization: f64,
    profile: Profile,
    /// K(0) of the represented kernel (full, untruncated mass).
    pub target_k0: f64,
    pub kernel_id: String,
}

impl MovingAverageKernel {
    /// Build the root for a samplable kernel.
    pub fn from_kernel(kernel: &Kernel, support_radius: f64) -> Result<Self> {
        if support_radius <= 0.0 {
            return Err(Error::domain("support_radius must be positive"));
        }
        match kernel.family {
            KernelFamily::Cauchy => {
                if kernel.dim != 2 {
                    return Err(Error::domain(
                        "moving-average root construction implemented for d = 2",
                    ));
                }
                let profile = hankel_root_cauchy(kernel.alpha, support_radius)?;
                Ok(MovingAverageKernel {
                    dim: 2,
                    support_radius,
                    normalization: 1.0,
                    profile: Profile::Spline(profile),
                    target_k0: 1.0,
                    kernel_id: kernel.id(),
                })
            }
            KernelFamily::LogCorrelated => {
                let profile = kernel
                    .log_profile()
                    .ok_or_else(|| Error::domain("missing log profile"))?
                    .clone();
                Ok(MovingAverageKernel {
                    dim: 2,
                    support_radius,
                    normalization: 1.0,
                    profile: Profile::Log(profile),
                    target_k0: kernel.k0.unwrap(),
                    kernel_id: kernel.id(),
                })
            }
            _ => Err(Error::domain(
                "moving-average root requires a samplable kernel family",
            )),
        }
    }

    /// Root from an explicit radial function (testing hook).
    pub fn custom(
        dim: usize,
        support_radius: f64,
        target_k0: f64,
        f: impl Fn(f64) -> f64,
    ) -> Self {
        let n = 801;
        let xs: Vec<f64> = (0..n)
            .map(|i| support_radius * i as f64 / (n - 1) as f64)
            .collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        MovingAverageKernel {
            dim,
            support_radius,
            normalization: 1.0,
            profile: Profile::Spline(CubicSpline::new(xs, ys)),
            target_k0,
            kernel_id: "custom-root".into(),
        }
    }

    /// Evaluate the (truncated) root.
    pub fn q(&self, x: f64) -> f64 {
        let x = x.abs();
        if x > self.support_radius {
            return 0.0;
        }
        let raw = match &self.profile {
            Profile::Spline(sp) => sp.eval(x),
            Profile::Log(p) => p.eval(x),
        };
        self.normalization * raw
    }

    /// Rescale the root by `c` (covariance scales by c^2).
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.normalization *= c;
        out
    }

    /// ||q||^2 of the truncated root: 2 pi \int_0^T rho q(rho)^2 drho (d = 2).
    pub fn truncated_norm_sq(&self) -> Result<f64> {
        let v = integrate(
            |x| x * self.q(x) * self.q(x),
            0.0,
            self.support_radius,
            1e-10,
            1e-300,
        )?;
        Ok(2.0 * std::f64::consts::PI * v.value)
    }

    /// Fraction of ||q||^2 lost to truncation, relative to the full K(0).
    pub fn discarded_fraction(&self) -> Result<f64> {
        let trunc = self.truncated_norm_sq()?;
        Ok(((self.target_k0 - trunc) / self.target_k0).max(0.0))
    }

    /// Autocovariance (q_T * q_T)(r) of the truncated root (d = 2).
    pub fn autocovariance(&self, r: f64, rel_tol: f64) -> Result<f64> {
        let t = self.support_radius;
        let q = |x: f64| self.q(x);
        let mut splits = vec![t * 0.5];
        if r > 0.0 {
            splits.extend_from_slice(&[(r - t).abs(), r.min(t), (r - t * 0.5).abs()]);
        }
        radial_autoconvolution_2d(&q, r, t, &splits, &[t], rel_tol)
    }

    /// Exact covariance of the lattice moving average with spacing `h`:
    /// `h^d sum_y q(y) q(y + lag)` over the d = 2 lattice.
    pub fn lattice_autocovariance(&self, h: f64, lag: [f64; 2]) -> f64 {
        let t = self.support_radius;
        let n = (t / h).ceil() as i64;
        let mut terms = Vec::new();
        for iy in -n..=n {
            for ix in -n..=n {
                let x = ix as f64 * h;
                let y = iy as f64 * h;
                let q1 = self.q((x * x + y * y).sqrt());
                if q1 == 0.0 {
                    continue;
                }
                let dx = x + lag[0];
                let dy = y + lag[1];
                let q2 = self.q((dx * dx + dy * dy).sqrt());
                if q2 != 0.0 {
                    terms.push(q1 * q2);
                }
            }
        }
        h * h * kahan_sum(terms.into_iter())
    }
}

/// Spectral density of the Cauchy kernel in the convention
/// K(x) = (2 pi)^{-d} \int rho(k) e^{i k x} dk, for d = 2, via the Laplace
/// mixture: rho(k) = \int v(s) (pi/s) e^{-k^2/(4s)} ds.
pub fn cauchy_spectral_density_2d(alpha: f64, k: f64) -> Result<f64> {
    let norm = (-crate::special::ln_gamma(alpha / 2.0)).exp();
    let a2 = alpha / 2.0;
    let k2 = k * k;
    let u_hi = 745.0f64.ln();
    let u_lo = if k > 0.0 {
        (2.0 * (k / 2.0).ln() - 40.0).min(-40.0)
    } else {
        -600.0
    };
    let v = integrate(
        |u: f64| {
            let s = u.exp();
            let arg = -s - if s > 0.0 { k2 / (4.0 * s) } else { f64::INFINITY };
            std::f64::consts::PI * norm * s.powf(a2 - 1.0) * arg.exp()
        },
        u_lo,
        u_hi,
        1e-11,
        1e-300,
    )?;
    Ok(v.value)
}

fn hankel_root_cauchy(alpha: f64, support_radius: f64) -> Result<CubicSpline> {
    // sqrt(rho) on a log-spaced k grid
    let k_lo = 1e-6f64;
    let n_k = 700;
    let mut lks = Vec::with_capacity(n_k);
    let mut lzs = Vec::with_capacity(n_k);
    for i in 0..n_k {
        let lk = k_lo.ln() + (K_MAX.ln() - k_lo.ln()) * i as f64 / (n_k - 1) as f64;
        let rho = cauchy_spectral_density_2d(alpha, lk.exp())?;
        if !(rho > 0.0) {
            return Err(Error::Construction(format!(
                "nonpositive spectral density at k = {}",
                lk.exp()
            )));
        }
        lks.push(lk);
        lzs.push(0.5 * rho.ln());
    }
    let z_spline = CubicSpline::new(lks, lzs);
    let z = |k: f64| z_spline.eval(k.ln()).exp();

    // q(x) = (2 pi)^{-1} \int_0^kmax sqrt(rho)(k) J0(k x) k dk,
    // integrated arch-by-arch between approximate Bessel zeros.
    let q_at = |x: f64| -> Result<f64> {
        let f = |k: f64| z(k) * bessel_j0(k * x) * k;
        if x < 1e-9 {
            let v = integrate(|k: f64| z(k) * k, k_lo, K_MAX, 1e-10, 1e-300)?.value;
            return Ok(v / (2.0 * std::f64::consts::PI));
        }
        let mut pieces = Vec::new();
        // head segment holds the k^{(alpha-2)/2} blow-up
        let first = (0.75 * std::f64::consts::PI / x).min(K_MAX);
        pieces.push(integrate(&f, k_lo, first, 1e-10, 1e-300)?.value);
        let mut a = first;
        let mut m = 1.0;
        while a < K_MAX {
            let b = ((0.75 + m) * std::f64::consts::PI / x).min(K_MAX);
            pieces.push(crate::quad::integrate_with_limit(&f, a, b, 1e-9, 1e-300, 12)?.value);
            a = b;
            m += 1.0;
        }
        Ok(kahan_sum(pieces.into_iter()) / (2.0 * std::f64::consts::PI))
    };

    let step = 0.0625;
    let n = (support_radius / step).ceil() as usize + 1;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let x = (i as f64 * step).min(support_radius);
        xs.push(x);
        ys.push(q_at(x)?);
    }
    if *xs.last().unwrap() < support_radius {
        xs.push(support_radius);
        ys.push(q_at(support_radius)?);
    }
    Ok(CubicSpline::new(xs, ys))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_density_alpha_one_closed_form() {
        // rho(k) = 2 pi e^{-k} / k for alpha = 1, d = 2
        for &k in &[0.1, 1.0, 5.0, 20.0] {
            let got = cauchy_spectral_density_2d(1.0, k).unwrap();
            let want = 2.0 * std::f64::consts::PI * (-k).exp() / k;
            assert!(
                (got / want - 1.0).abs() < 1e-9,
                "k={k}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn root_mass_accounts_for_truncation() {
        let kernel = Kernel::cauchy(0.5, 2).unwrap();
        let ma = MovingAverageKernel::from_kernel(&kernel, 24.0).unwrap();
        let d = ma.discarded_fraction().unwrap();
        // q ~ x^{-5/4}: visible tail mass beyond 24, but most mass captured
        assert!(d > 0.01 && d < 0.25, "discarded {d}");
    }

    #[test]
    fn truncated_autocovariance_tracks_kernel() {
        let kernel = Kernel::cauchy(0.5, 2).unwrap();
        let ma = MovingAverageKernel::from_kernel(&kernel, 24.0).unwrap();
        let d = ma.discarded_fraction().unwrap();
        // K - q_T * q_T is the mass over the discarded tail region, which for
        // r << T stays close to d * K(0).
        for &r in &[0.0, 1.0, 2.0, 4.0] {
            let got = ma.autocovariance(r, 1e-7).unwrap();
            let want = kernel.eval(r);
            assert!(
                (got - want).abs() <= 1.3 * d * ma.target_k0 + 1e-3,
                "r={r}: {got} vs {want} (discarded {d})"
            );
        }
    }

    #[test]
    fn lattice_autocovariance_close_to_continuum() {
        let kernel = Kernel::cauchy(1.0, 2).unwrap();
        let ma = MovingAverageKernel::from_kernel(&kernel, 16.0).unwrap();
        let cont = ma.autocovariance(1.0, 1e-7).unwrap();
        let latt = ma.lattice_autocovariance(0.25, [1.0, 0.0]);
        assert!((cont - latt).abs() < 5e-3, "{cont} vs {latt}");
    }

    #[test]
    fn rejects_riesz() {
        let kernel = Kernel::riesz(0.5, 2).unwrap();
        assert!(MovingAverageKernel::from_kernel(&kernel, 8.0).is_err());
    }
}
