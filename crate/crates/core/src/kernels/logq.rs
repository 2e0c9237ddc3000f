//! Log-correlated kernel: K = q * q for an explicit radial convolution root
//! with tail q(x) = A x^-1 (log x)^-(gamma+1)/2.
//!
//! Inside `join_radius` the root is capped by the cubic a + b x^2 + c x^3
//! matched in value, first and second derivative at the join; q'(0) = 0 holds
//! automatically and the matching signs force q' <= 0 on the cap, so the root
//! is unimodal. The amplitude is fixed numerically so that
//! K(r) (log r)^gamma -> 1, evaluated at r = 1e4.

use super::conv::radial_autoconvolution_2d;
use super::spline::CubicSpline;
use crate::error::{Error, Result};
use crate::quad::integrate;

const NORMALIZATION_RADIUS: f64 = 1.0e4;

/// Radial convolution root of the log-correlated family.
#[derive(Clone, Debug)]
pub struct LogProfile {
    pub gamma: f64,
    pub join_radius: f64,
    amplitude: f64,
    cap: [f64; 3], // a, b, c of the cubic cap (amplitude excluded)
}

impl LogProfile {
    fn tail_exponent(&self) -> f64 {
        0.5 * (self.gamma + 1.0)
    }

    /// Unnormalized profile with the stated tail and a C^2 cubic cap.
    pub fn raw(gamma: f64, join_radius: f64) -> Result<Self> {
        if gamma <= 0.0 {
            return Err(Error::domain(format!("log kernel requires gamma > 0, got {gamma}")));
        }
        if join_radius < 2.0 {
            return Err(Error::domain(format!(
                "join_radius must be >= 2, got {join_radius}"
            )));
        }
        let p = 0.5 * (gamma + 1.0);
        let j = join_radius;
        let lam = j.ln();
        let t = lam.powf(-p) / j;
        let tp = -(lam.powf(-p) + p * lam.powf(-p - 1.0)) / (j * j);
        let tpp = (2.0 * lam.powf(-p) + 3.0 * p * lam.powf(-p - 1.0)
            + p * (p + 1.0) * lam.powf(-p - 2.0))
            / (j * j * j);
        let c = (tpp * j - tp) / (3.0 * j * j);
        let b = (2.0 * tp - tpp * j) / (2.0 * j);
        let a = t - b * j * j - c * j * j * j;
        Ok(LogProfile {
            gamma,
            join_radius,
            amplitude: 1.0,
            cap: [a, b, c],
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        let v = if x < self.join_radius {
            let [a, b, c] = self.cap;
            a + x * x * (b + c * x)
        } else {
            x.ln().powf(-self.tail_exponent()) / x
        };
        self.amplitude * v
    }

    /// `(q * q)(r)`: numeric shell integral out to `y0 = 50 max(r, j)` plus the
    /// closed-form contribution of the pure power-log tail beyond `y0` (the
    /// angular average there is `2 pi q(rho)^2 (1 + r^2/rho^2 (1/4 + ...))`,
    /// leaving a relative remainder of order `(r/y0)^4`).
    pub fn autoconvolution(&self, r: f64, rel_tol: f64) -> Result<f64> {
        let j = self.join_radius;
        let y0 = 50.0 * r.max(j);
        let q = |x: f64| self.eval(x);
        let mut splits = vec![j, 2.0 * j];
        if r > 0.0 {
            splits.extend_from_slice(&[(r - j).abs(), r, r + j]);
        }
        let core = radial_autoconvolution_2d(&q, r, y0, &splits, &[j, 2.0 * j], rel_tol)?;
        Ok(core + self.tail_contribution(r, y0)?)
    }

    fn tail_contribution(&self, r: f64, y0: f64) -> Result<f64> {
        let g = self.gamma;
        let p = self.tail_exponent();
        let lam0 = y0.ln();
        let two_pi = 2.0 * std::f64::consts::PI;
        let leading = lam0.powf(-g) / g;
        // \int_{y0}^inf rho^-3 lam^-(g+1) (1/4 + p/(2 lam) + p(p+1)/(4 lam^2)) drho
        // via rho = y0 / w.
        let second = integrate(
            |w: f64| {
                if w <= 0.0 {
                    return 0.0;
                }
                let lam = (y0 / w).ln();
                w * lam.powf(-(g + 1.0))
                    * (0.25 + 0.5 * p / lam + 0.25 * p * (p + 1.0) / (lam * lam))
            },
            0.0,
            1.0,
            1e-10,
            1e-300,
        )?
        .value
            / (y0 * y0);
        Ok(two_pi * self.amplitude * self.amplitude * (leading + r * r * second))
    }

    /// `||q||^2 = (q * q)(0)`, exactly `2 pi \int rho q^2` for radial q.
    pub fn norm_sq(&self) -> Result<f64> {
        let j = self.join_radius;
        let core = integrate(|x| x * self.eval(x) * self.eval(x), 0.0, j, 1e-11, 1e-300)?.value;
        let g = self.gamma;
        let tail = self.amplitude * self.amplitude * j.ln().powf(-g) / g;
        Ok(2.0 * std::f64::consts::PI * (core + tail))
    }
}

/// Tabulated K = q * q evaluator for the log-correlated kernel.
#[derive(Clone, Debug)]
pub struct LogKernelTable {
    pub profile: LogProfile,
    inner: CubicSpline,          // K(r) on [0, inner_max]
    outer: CubicSpline,          // K(r) (log r)^gamma against ln r
    inner_max: f64,
    outer_max: f64,
    tail_coeff: f64,             // K ~ tail_coeff (log r)^-gamma beyond the table
    pub k0: f64,
}

impl LogKernelTable {
    pub fn build(gamma: f64, join_radius: f64) -> Result<Self> {
        let raw = LogProfile::raw(gamma, join_radius)?;
        let norm_point = raw.autoconvolution(NORMALIZATION_RADIUS, 1e-9)?
            * NORMALIZATION_RADIUS.ln().powf(gamma);
        if !(norm_point.is_finite() && norm_point > 0.0) {
            return Err(Error::Construction(format!(
                "log kernel normalization integral failed: got {norm_point}"
            )));
        }
        let profile = raw.clone().with_amplitude(1.0 / norm_point.sqrt());

        let inner_max = 24.0f64;
        let n_inner = 481;
        let mut xs = Vec::with_capacity(n_inner);
        let mut ys = Vec::with_capacity(n_inner);
        for i in 0..n_inner {
            let r = inner_max * i as f64 / (n_inner - 1) as f64;
            xs.push(r);
            ys.push(profile.autoconvolution(r, 1e-9)?);
        }
        let k0 = ys[0];
        let inner = CubicSpline::new(xs, ys);

        let outer_max = 1.2e5f64;
        let n_outer = 161;
        let mut lxs = Vec::with_capacity(n_outer);
        let mut lys = Vec::with_capacity(n_outer);
        let lr0 = inner_max.ln();
        let lr1 = outer_max.ln();
        for i in 0..n_outer {
            let lr = lr0 + (lr1 - lr0) * i as f64 / (n_outer - 1) as f64;
            let r = lr.exp();
            lxs.push(lr);
            lys.push(profile.autoconvolution(r, 1e-9)? * lr.powf(gamma));
        }
        let tail_coeff = *lys.last().unwrap();
        let outer = CubicSpline::new(lxs, lys);
        Ok(LogKernelTable {
            profile,
            inner,
            outer,
            inner_max,
            outer_max,
            tail_coeff,
            k0,
        })
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= self.inner_max {
            self.inner.eval(r)
        } else if r <= self.outer_max {
            let lr = r.ln();
            self.outer.eval(lr) * lr.powf(-self.profile.gamma)
        } else {
            self.tail_coeff * r.ln().powf(-self.profile.gamma)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_is_monotone_and_positive() {
        for &gamma in &[0.5, 1.0, 2.0] {
            let q = LogProfile::raw(gamma, 2.0).unwrap();
            let mut prev = f64::INFINITY;
            for i in 0..=400 {
                let x = i as f64 * 0.02;
                let v = q.eval(x);
                assert!(v > 0.0, "q({x}) = {v} not positive (gamma {gamma})");
                assert!(
                    v <= prev + 1e-12,
                    "q not nonincreasing at {x} (gamma {gamma})"
                );
                prev = v;
            }
        }
    }

    #[test]
    fn cap_joins_smoothly() {
        let q = LogProfile::raw(1.0, 3.0).unwrap();
        let h = 1e-5;
        let d_in = (q.eval(3.0 - h) - q.eval(3.0 - 2.0 * h)) / h;
        let d_out = (q.eval(3.0 + 2.0 * h) - q.eval(3.0 + h)) / h;
        assert!((d_in - d_out).abs() < 1e-4, "{d_in} vs {d_out}");
    }

    #[test]
    fn norm_sq_matches_autoconvolution_at_zero() {
        let q = LogProfile::raw(1.0, 2.0).unwrap();
        let a = q.norm_sq().unwrap();
        let b = q.autoconvolution(0.0, 1e-9).unwrap();
        assert!((a - b).abs() < 1e-7 * a, "{a} vs {b}");
    }
}
