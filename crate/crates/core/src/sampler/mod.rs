//! Gaussian field synthesis on regular grids.
//!
//! Determinism contract: a field is a pure function of
//! `(kernel, grid, seed, trial)`. Trial `t` uses the ChaCha12 stream `t`
//! under the job seed (see [`crate::rng`]), so trials can be drawn
//! independently and in any order. Sampling never mutates shared state;
//! samplers are built once per (kernel, grid) and shared across threads.
//!
//! Field files written by the CLI: a one-line JSON header
//! (dims/spacing/origin/seed/method) terminated by a newline, followed by
//! the values as little-endian f64 in row-major order; a `.meta.json`
//! sidecar carries the full provenance.

mod fft;
mod grid;
pub mod moving_average;
pub mod spectral;
mod tilt;

pub use grid::{Grid, GridField, Provenance, SeedRecord};
pub use moving_average::{
    local_global_split, sample_moving_average, smooth_cutoff, MovingAverageSampler,
};
pub use spectral::{sample_field, FieldSampler, SamplerBudget, DENSE_LIMIT, PADDING_FACTOR};
pub use tilt::{TiltedSample, Tilter};

use crate::error::{Error, Result};
use crate::special::normal_cdf;
use crate::sum::kahan_sum;

/// Empirical covariance at an axis-aligned physical lag.
#[derive(Clone, Copy, Debug)]
pub struct CovarianceEstimate {
    pub lag: f64,
    pub mean: f64,
    pub se: f64,
    pub fields: usize,
}

/// Unbiased covariance estimates averaged over translations along each axis,
/// with standard errors across fields (each field is one observation unit;
/// the field mean is known to be zero so raw products are averaged).
pub fn empirical_covariance(fields: &[GridField], lags: &[f64]) -> Result<Vec<CovarianceEstimate>> {
    if fields.len() < 100 {
        return Err(Error::domain(
            "need at least 100 independent fields for covariance estimates",
        ));
    }
    let grid = &fields[0].grid;
    if fields.iter().any(|f| f.grid != *grid) {
        return Err(Error::domain("mismatched grids across fields"));
    }
    let h = grid.spacing;
    let mut out = Vec::with_capacity(lags.len());
    for &lag in lags {
        let steps = lag / h;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "lag {lag} is not a multiple of the grid spacing {h}"
            )));
        }
        let k = steps.round() as usize;
        let per_field: Vec<f64> = fields
            .iter()
            .map(|f| mean_lag_product(f, k))
            .collect::<Result<_>>()?;
        let n = per_field.len() as f64;
        let mean = kahan_sum(per_field.iter().copied()) / n;
        let var = kahan_sum(per_field.iter().map(|m| (m - mean) * (m - mean))) / (n - 1.0);
        out.push(CovarianceEstimate {
            lag,
            mean,
            se: (var / n).sqrt(),
            fields: per_field.len(),
        });
    }
    Ok(out)
}

fn mean_lag_product(field: &GridField, k: usize) -> Result<f64> {
    let grid = &field.grid;
    let v = &field.values;
    if k == 0 {
        let n = v.len() as f64;
        return Ok(kahan_sum(v.iter().map(|x| x * x)) / n);
    }
    let mut acc = 0.0;
    let mut count = 0usize;
    match grid.dims.len() {
        2 => {
            let (ny, nx) = (grid.dims[0], grid.dims[1]);
            if k >= nx && k >= ny {
                return Err(Error::domain("lag exceeds grid extent"));
            }
            for iy in 0..ny {
                let row = iy * nx;
                for ix in 0..nx.saturating_sub(k) {
                    acc += v[row + ix] * v[row + ix + k];
                    count += 1;
                }
            }
            for iy in 0..ny.saturating_sub(k) {
                for ix in 0..nx {
                    acc += v[iy * nx + ix] * v[(iy + k) * nx + ix];
                    count += 1;
                }
            }
        }
        1 => {
            let n = grid.dims[0];
            if k >= n {
                return Err(Error::domain("lag exceeds grid extent"));
            }
            for i in 0..n - k {
                acc += v[i] * v[i + k];
                count += 1;
            }
        }
        _ => return Err(Error::domain("covariance lags implemented for d <= 2")),
    }
    Ok(acc / count as f64)
}

/// Anderson–Darling statistic against the standard normal with known
/// parameters. The 5% critical value for the fully specified case is 2.492.
pub fn anderson_darling_normal(samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    let nf = n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let phi_lo = normal_cdf(xs[i]).clamp(1e-300, 1.0 - 1e-16);
        let phi_hi = normal_cdf(xs[n - 1 - i]).clamp(1e-300, 1.0 - 1e-16);
        acc += (2.0 * i as f64 + 1.0) * (phi_lo.ln() + (1.0 - phi_hi).ln());
    }
    -nf - acc / nf
}

pub const ANDERSON_DARLING_5PCT: f64 = 2.492;
