//! Moving-average sampling f = q * W and the local/global split
//! f = f_L + g_L obtained by truncating the root at scale L.

use super::fft::{next_fft_size, NdFft};
use super::grid::{Grid, GridField, Provenance, SeedRecord};
use crate::error::{Error, Result};
use crate::kernels::MovingAverageKernel;
use crate::rng::trial_rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

/// Smooth cutoff: 1 on [0, 1/4], 0 on [1/2, inf), C-infinity in between
/// (exp(-1/x) smoothstep).
pub fn smooth_cutoff(t: f64) -> f64 {
    if t <= 0.25 {
        1.0
    } else if t >= 0.5 {
        0.0
    } else {
        let u = (t - 0.25) / 0.25;
        let s = |v: f64| (-1.0 / v).exp();
        s(1.0 - u) / (s(u) + s(1.0 - u))
    }
}

/// Fraction of ||q||^2 (relative to the represented kernel's K(0)) that may
/// be discarded by truncation before a warning is recorded.
pub const TRUNCATION_WARN_THRESHOLD: f64 = 0.01;

/// Sampler for f = q * W on a 2-D grid; white noise lives on the same
/// lattice extended to a torus large enough that the circular convolution is
/// linear over the window.
pub struct MovingAverageSampler {
    pub grid: Grid,
    torus: [usize; 2],
    fft: NdFft,
    /// FFT of the root lattice, premultiplied by h^{d/2} / N
    q_hat: Vec<Complex64>,
    /// like q_hat but for the local root q_L = q phi(|x|/L)
    q_local_hat: Option<(f64, Vec<Complex64>)>,
    kernel_id: String,
    discarded: f64,
    warnings: Vec<String>,
}

impl MovingAverageSampler {
    pub fn new(ma: &MovingAverageKernel, grid: &Grid) -> Result<Self> {
        Self::with_split(ma, grid, None)
    }

    /// Sampler that also prepares the local root at scale `split_scale`.
    pub fn with_split(
        ma: &MovingAverageKernel,
        grid: &Grid,
        split_scale: Option<f64>,
    ) -> Result<Self> {
        if grid.dim() != 2 || ma.dim != 2 {
            return Err(Error::domain("moving-average sampling is two-dimensional"));
        }
        if let Some(l) = split_scale {
            if l < 1.0 {
                return Err(Error::domain("split scale L must be >= 1"));
            }
            if grid.extent(0) < 2.0 * l || grid.extent(1) < 2.0 * l {
                return Err(Error::domain("grid extent must be at least 2 L"));
            }
        }
        let h = grid.spacing;
        let reach = (ma.support_radius / h).ceil() as usize + 1;
        let torus = [
            next_fft_size(grid.dims[0] - 1 + 2 * reach),
            next_fft_size(grid.dims[1] - 1 + 2 * reach),
        ];
        let fft = NdFft::new(&torus);
        let n_total = torus[0] * torus[1];
        let scale = h / (n_total as f64); // h^{d/2} with d = 2, folded with 1/N
        let lattice = |f: &dyn Fn(f64) -> f64| -> Vec<Complex64> {
            let mut out = Vec::with_capacity(n_total);
            for iy in 0..torus[0] {
                let wy = iy.min(torus[0] - iy) as f64 * h;
                for ix in 0..torus[1] {
                    let wx = ix.min(torus[1] - ix) as f64 * h;
                    let r = (wx * wx + wy * wy).sqrt();
                    out.push(Complex64::new(f(r) * scale, 0.0));
                }
            }
            out
        };
        let mut q_hat = lattice(&|r| ma.q(r));
        fft.forward(&mut q_hat);
        let q_local_hat = match split_scale {
            Some(l) => {
                let mut ql = lattice(&|r| ma.q(r) * smooth_cutoff(r / l));
                fft.forward(&mut ql);
                Some((l, ql))
            }
            None => None,
        };
        let discarded = ma.discarded_fraction()?;
        let mut warnings = Vec::new();
        if discarded > TRUNCATION_WARN_THRESHOLD {
            warnings.push(format!(
                "root truncation at radius {} discards fraction {discarded:.3e} of ||q||^2",
                ma.support_radius
            ));
        }
        Ok(MovingAverageSampler {
            grid: grid.clone(),
            torus,
            fft,
            q_hat,
            q_local_hat,
            kernel_id: ma.kernel_id.clone(),
            discarded,
            warnings,
        })
    }

    pub fn discarded_fraction(&self) -> f64 {
        self.discarded
    }

    fn noise_spectrum(&self, seed: u64, trial: u64) -> Vec<Complex64> {
        let mut rng = trial_rng(seed, trial);
        let n_total = self.torus[0] * self.torus[1];
        let mut buf: Vec<Complex64> = (0..n_total)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(a, 0.0)
            })
            .collect();
        self.fft.forward(&mut buf);
        buf
    }

    fn convolve_window(&self, noise_hat: &[Complex64], root_hat: &[Complex64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = noise_hat
            .iter()
            .zip(root_hat)
            .map(|(a, b)| a * b)
            .collect();
        self.fft.inverse(&mut buf);
        let mut out = Vec::with_capacity(self.grid.len());
        for iy in 0..self.grid.dims[0] {
            let row = iy * self.torus[1];
            for ix in 0..self.grid.dims[1] {
                out.push(buf[row + ix].re);
            }
        }
        out
    }

    fn field(&self, values: Vec<f64>, seed: u64, trial: u64, method: &str, l: Option<f64>) -> GridField {
        GridField {
            grid: self.grid.clone(),
            values,
            seed: SeedRecord {
                seed,
                stream: trial,
            },
            provenance: Provenance {
                method: method.into(),
                kernel_id: self.kernel_id.clone(),
                split_scale: l,
                clipped_mass: 0.0,
                warnings: self.warnings.clone(),
            },
        }
    }

    /// Draw f = q * W.
    pub fn sample(&self, seed: u64, trial: u64) -> GridField {
        let noise = self.noise_spectrum(seed, trial);
        let values = self.convolve_window(&noise, &self.q_hat);
        self.field(values, seed, trial, "moving-average", None)
    }

    /// Draw the split (f, f_L, g_L) from one white-noise lattice:
    /// f_L = q_L * W and g_L = f - f_L, so f_L + g_L recombines to f exactly
    /// up to one rounding per point.
    pub fn sample_split(&self, seed: u64, trial: u64) -> Result<(GridField, GridField, GridField)> {
        let (l, ql_hat) = self
            .q_local_hat
            .as_ref()
            .ok_or_else(|| Error::domain("sampler was built without a split scale"))?;
        let noise = self.noise_spectrum(seed, trial);
        let f_values = self.convolve_window(&noise, &self.q_hat);
        let fl_values = self.convolve_window(&noise, ql_hat);
        let gl_values: Vec<f64> = f_values
            .iter()
            .zip(&fl_values)
            .map(|(f, fl)| f - fl)
            .collect();
        Ok((
            self.field(f_values, seed, trial, "moving-average", None),
            self.field(fl_values, seed, trial, "moving-average-local", Some(*l)),
            self.field(gl_values, seed, trial, "moving-average-global", Some(*l)),
        ))
    }
}

/// One-shot wrappers matching the operation signatures.
pub fn sample_moving_average(
    ma: &MovingAverageKernel,
    grid: &Grid,
    seed: u64,
) -> Result<GridField> {
    Ok(MovingAverageSampler::new(ma, grid)?.sample(seed, 0))
}

pub fn local_global_split(
    ma: &MovingAverageKernel,
    l: f64,
    grid: &Grid,
    seed: u64,
) -> Result<(GridField, GridField)> {
    let sampler = MovingAverageSampler::with_split(ma, grid, Some(l))?;
    let (_, fl, gl) = sampler.sample_split(seed, 0)?;
    Ok((fl, gl))
}
