//! Special functions: gamma/beta wrappers, Bessel J0, the standard normal CDF.

pub use statrs::function::beta::beta_reg;
pub use statrs::function::gamma::ln_gamma;

/// Euler Beta function B(a, b).
pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Bessel function of the first kind, order zero.
///
/// Power series for |x| <= 12, Hankel asymptotic expansion beyond; absolute
/// accuracy around 1e-11 over the whole line.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 12.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let kf = k as f64;
            term *= -q / (kf * kf);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        sum
    } else {
        let z = 1.0 / (x * x);
        // mu = 0 Hankel coefficients
        let p = 1.0
            + z * (-9.0 / 128.0
                + z * (11_025.0 / 98_304.0 + z * (-108_056_025.0 / 188_743_680.0)));
        let q = (-1.0 / 8.0 + z * (75.0 / 1024.0 + z * (-893_025.0 / 3_932_160.0))) / x;
        let omega = x - std::f64::consts::FRAC_PI_4;
        (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * omega.cos() - q * omega.sin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_reference_values() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_5).abs() < 1e-12);
        assert!((bessel_j0(2.404_825_557_695_773)).abs() < 1e-10); // first zero
        assert!((bessel_j0(10.0) + 0.245_935_764_451_348_32).abs() < 1e-11);
        // asymptotic branch
        assert!((bessel_j0(12.5) - 0.146_884_054_700_420_93).abs() < 5e-8);
        assert!((bessel_j0(15.0) + 0.014_224_472_826_780_597).abs() < 1e-8);
        assert!((bessel_j0(50.0) - 0.055_812_327_669_252_086).abs() < 1e-9);
        assert!((bessel_j0(200.0) + 0.015_437_439_930_564_947).abs() < 1e-10);
        assert!((bessel_j0(200.0) - bessel_j0(-200.0)).abs() == 0.0);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 5e-12);
        assert!((normal_cdf(-8.0) - 6.220_960_574_271_786e-16).abs() < 1e-18);
    }

    #[test]
    fn beta_identity() {
        assert!((beta(0.5, 0.5) - std::f64::consts::PI).abs() < 1e-12);
    }
}
