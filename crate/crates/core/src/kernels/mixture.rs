//! Laplace scale-mixture representation K(r) = L[v](r^2).
//!
//! The associated scale-space moving-average weight is
//! `w(t) = (1/2) pi^{-d/2} t^{-d-3} v(1/(4 t^2))`, paired with the Gaussian
//! bump `Q(x) = exp(-|x|^2/2)`: convolving `sqrt(w(t)) Q(x/t)` against white
//! noise on R^d x R^+ reproduces the kernel.

use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::special::ln_gamma;
use std::sync::Arc;

#[derive(Clone)]
pub struct ScaleMixture {
    pub dim: usize,
    /// Laplace weight v(s) >= 0.
    v: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Numeric support of the scale variable t of w(t).
    pub t_range: (f64, f64),
    s_range: (f64, f64),
}

impl ScaleMixture {
    /// Mixture of the Cauchy kernel: v(s) = s^{alpha/2 - 1} e^{-s} / Gamma(alpha/2).
    pub fn cauchy(alpha: f64, dim: usize) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::domain("cauchy mixture needs alpha > 0"));
        }
        let norm = (-ln_gamma(alpha / 2.0)).exp();
        let a2 = alpha / 2.0;
        let v = move |s: f64| {
            if s <= 0.0 {
                0.0
            } else {
                norm * s.powf(a2 - 1.0) * (-s).exp()
            }
        };
        // lower cutoff keeps the omitted head mass ~ s_lo^{alpha/2} below 1e-20
        let s_lo = (1e-20f64.ln() * 2.0 / alpha).exp().max(1e-290);
        let s_hi = 745.0f64;
        Ok(ScaleMixture {
            dim,
            v: Arc::new(v),
            t_range: (0.5 / s_hi.sqrt(), 0.5 / s_lo.sqrt()),
            s_range: (s_lo, s_hi),
        })
    }

    /// Mixture from an arbitrary nonnegative Laplace weight with the given
    /// numeric support in the s variable.
    pub fn from_weight(
        dim: usize,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        s_range: (f64, f64),
    ) -> Self {
        ScaleMixture {
            dim,
            v: Arc::new(v),
            t_range: (0.5 / s_range.1.sqrt(), 0.5 / s_range.0.sqrt()),
            s_range,
        }
    }

    pub fn v(&self, s: f64) -> f64 {
        (self.v)(s)
    }

    /// Scale-space weight w(t) = (1/2) pi^{-d/2} t^{-d-3} v(1/(4 t^2)).
    pub fn w(&self, t: f64) -> f64 {
        let d = self.dim as f64;
        0.5 * std::f64::consts::PI.powf(-d / 2.0) * t.powf(-d - 3.0) * self.v(0.25 / (t * t))
    }

    /// Reconstruct K(r) = \int e^{-s r^2} v(s) ds by adaptive quadrature in
    /// u = log s.
    pub fn reconstruct(&self, r: f64, quad_tol: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::domain("negative distance"));
        }
        let (s_lo, s_hi) = self.s_range;
        let s_hi = if r > 0.0 { s_hi.min(750.0 / (r * r)) } else { s_hi };
        if s_hi <= s_lo {
            return Ok(0.0);
        }
        let r2 = r * r;
        let q = integrate(
            |u: f64| {
                let s = u.exp();
                (-s * r2).exp() * self.v(s) * s
            },
            s_lo.ln(),
            s_hi.ln(),
            quad_tol,
            1e-300,
        )?;
        Ok(q.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;

    #[test]
    fn cauchy_weight_closed_form() {
        // alpha = 1: v(s) = pi^{-1/2} s^{-1/2} e^{-s}
        let m = ScaleMixture::cauchy(1.0, 2).unwrap();
        for &s in &[0.1f64, 1.0, 3.0] {
            let expect = std::f64::consts::PI.powf(-0.5) * s.powf(-0.5) * (-s).exp();
            assert!((m.v(s) - expect).abs() < 1e-14 * expect);
            assert!(m.v(s) >= 0.0);
        }
    }

    #[test]
    fn reconstruction_matches_closed_form() {
        for &alpha in &[0.5, 1.0, 1.5] {
            let k = Kernel::cauchy(alpha, 2).unwrap();
            let m = k.scale_mixture().unwrap();
            for &r in &[0.0, 0.5, 1.0, 2.0, 10.0] {
                let got = m.reconstruct(r, 1e-10).unwrap();
                let want = k.eval(r);
                assert!(
                    (got - want).abs() <= 1e-8,
                    "alpha={alpha} r={r}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn reconstruction_examples() {
        let m = ScaleMixture::cauchy(1.0, 2).unwrap();
        let v = m.reconstruct(3.0f64.sqrt(), 1e-10).unwrap();
        assert!((v - 0.5).abs() < 1e-9);
        let m = ScaleMixture::cauchy(0.5, 2).unwrap();
        let v = m.reconstruct(2.0, 1e-10).unwrap();
        assert!((v - 5.0f64.powf(-0.25)).abs() < 1e-9);
        assert!((v - 0.6687).abs() < 1e-4);
    }

    #[test]
    fn scale_space_weight_reproduces_kernel() {
        // \int w(t) pi^{d/2} t^d exp(-r^2/(4 t^2)) dt = K(r)
        let k = Kernel::cauchy(0.5, 2).unwrap();
        let m = k.scale_mixture().unwrap();
        let d = 2.0f64;
        for &r in &[0.7, 2.0] {
            let got = crate::quad::integrate(
                |u: f64| {
                    let t = u.exp();
                    m.w(t)
                        * std::f64::consts::PI.powf(d / 2.0)
                        * t.powf(d)
                        * (-r * r / (4.0 * t * t)).exp()
                        * t
                },
                m.t_range.0.ln(),
                m.t_range.1.ln(),
                1e-10,
                1e-300,
            )
            .unwrap()
            .value;
            assert!((got - k.eval(r)).abs() < 1e-8, "r={r}: {got}");
        }
    }
}
