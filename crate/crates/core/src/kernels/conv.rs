//! 2-D radial (auto)convolution by nested quadrature.

use crate::error::Result;
use crate::quad::integrate;

/// Angular integral of `q` over the circle of radius `rho`, seen from a point
/// at distance `r` on the first axis:
/// `A(rho) = \int_0^{2pi} q(|rho e_theta - r e_1|) dtheta`.
///
/// `dist_splits` lists radii at which `q` has kinks or jumps (cap joins,
/// truncation edges); the corresponding angles are inserted as subdivision
/// points so narrow angular windows are not missed at large `rho r`.
pub fn angular_integral<F: Fn(f64) -> f64>(
    q: &F,
    rho: f64,
    r: f64,
    rel_tol: f64,
    dist_splits: &[f64],
) -> Result<f64> {
    let f = |theta: f64| {
        let d2 = rho * rho + r * r - 2.0 * rho * r * theta.cos();
        q(d2.max(0.0).sqrt())
    };
    let mut angles = vec![0.0, std::f64::consts::PI];
    if rho > 0.0 && r > 0.0 {
        for &d in dist_splits {
            let cos_t = (rho * rho + r * r - d * d) / (2.0 * rho * r);
            if cos_t.abs() < 1.0 {
                angles.push(cos_t.acos());
            }
        }
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup();
    let mut total = 0.0;
    for w in angles.windows(2) {
        total += integrate(f, w[0], w[1], rel_tol, 1e-300)?.value;
    }
    Ok(2.0 * total)
}

/// `(q * q)(r)` for an isotropic `q` on R^2, integrating the radial shell
/// variable out to `outer_cut` with extra subdivision points in `splits`;
/// `dist_splits` is forwarded to the angular integral.
pub fn radial_autoconvolution_2d<F: Fn(f64) -> f64>(
    q: &F,
    r: f64,
    outer_cut: f64,
    splits: &[f64],
    dist_splits: &[f64],
    rel_tol: f64,
) -> Result<f64> {
    let mut pts: Vec<f64> = vec![0.0, outer_cut];
    for &s in splits {
        if s > 0.0 && s < outer_cut {
            pts.push(s);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let inner_tol = rel_tol * 0.25;
    let mut total = 0.0;
    for w in pts.windows(2) {
        let seg = integrate(
            |rho| {
                let ang = angular_integral(q, rho, r, inner_tol, dist_splits).unwrap_or(f64::NAN);
                rho * q(rho) * ang
            },
            w[0],
            w[1],
            rel_tol,
            1e-300,
        )?;
        total += seg.value;
    }
    Ok(total)
}
