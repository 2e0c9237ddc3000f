//! Stationary Gaussian field synthesis on regular grids.
//!
//! Large grids use spectral synthesis on a padded torus: the kernel is
//! evaluated under the minimum-image metric, its DFT is clipped at zero, and
//! one inverse FFT of spectrally-scaled complex white noise yields a sample
//! (the real part carries the target covariance exactly, up to clipping).
//! Grids with at most [`DENSE_LIMIT`] points instead use the symmetric square
//! root of the dense Gram matrix.

use super::fft::{next_fft_size, NdFft};
use super::grid::{Grid, GridField, Provenance, SeedRecord};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::rng::trial_rng;
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

/// Grids at or below this many points are sampled by dense factorization.
pub const DENSE_LIMIT: usize = 4096;

/// Torus period over window extent for spectral synthesis.
pub const PADDING_FACTOR: f64 = 4.0;

/// Relative clipped spectral mass above which a warning is recorded.
pub const CLIP_WARN_THRESHOLD: f64 = 1e-3;

pub struct SamplerBudget {
    /// Hard cap on padded torus points (resource guard).
    pub max_torus_points: usize,
}

impl Default for SamplerBudget {
    fn default() -> Self {
        SamplerBudget {
            max_torus_points: 64 * 1024 * 1024,
        }
    }
}

enum Backend {
    Spectral {
        torus_dims: Vec<usize>,
        fft: NdFft,
        /// sqrt(max(lambda, 0) / N) per torus frequency
        scale: Vec<f64>,
    },
    Dense {
        root: DMatrix<f64>,
    },
}

/// Reusable sampler for one (kernel, grid) pair; drawing trial `t` with seed
/// `s` is a pure function of `(kernel, grid, s, t)`.
pub struct FieldSampler {
    pub grid: Grid,
    kernel_id: String,
    backend: Backend,
    pub clipped_mass: f64,
    warnings: Vec<String>,
}

impl FieldSampler {
    pub fn new(kernel: &Kernel, grid: &Grid, budget: &SamplerBudget) -> Result<Self> {
        if !kernel.samplable() {
            return Err(Error::Domain(format!(
                "capacity-only kernel {} cannot back a field sampler",
                kernel.id()
            )));
        }
        if grid.len() <= DENSE_LIMIT {
            Self::new_dense(kernel, grid)
        } else {
            Self::new_spectral(kernel, grid, budget)
        }
    }

    fn new_dense(kernel: &Kernel, grid: &Grid) -> Result<Self> {
        let n = grid.len();
        let coords: Vec<Vec<f64>> = (0..n).map(|i| grid.coord(i)).collect();
        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let d2: f64 = coords[i]
                    .iter()
                    .zip(&coords[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let v = kernel.eval(d2.sqrt());
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let eig = gram.symmetric_eigen();
        let mut clipped = 0.0;
        let mut total = 0.0;
        let mut scaled = eig.eigenvectors.clone();
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            total += lam.abs();
            if lam < 0.0 {
                clipped += -lam;
            }
            let s = lam.max(0.0).sqrt();
            for r in 0..n {
                scaled[(r, k)] *= s;
            }
        }
        let root = &scaled * eig.eigenvectors.transpose();
        let clipped_mass = if total > 0.0 { clipped / total } else { 0.0 };
        let mut warnings = Vec::new();
        if clipped_mass > CLIP_WARN_THRESHOLD {
            warnings.push(format!(
                "dense factorization clipped relative mass {clipped_mass:.3e}"
            ));
        }
        Ok(FieldSampler {
            grid: grid.clone(),
            kernel_id: kernel.id(),
            backend: Backend::Dense { root },
            clipped_mass,
            warnings,
        })
    }

    fn new_spectral(kernel: &Kernel, grid: &Grid, budget: &SamplerBudget) -> Result<Self> {
        let torus_dims: Vec<usize> = grid
            .dims
            .iter()
            .map(|&n| next_fft_size((PADDING_FACTOR * (n - 1) as f64).ceil() as usize))
            .collect();
        let total: usize = torus_dims.iter().product();
        if total > budget.max_torus_points {
            return Err(Error::Resource(format!(
                "padded torus has {total} points, budget {}",
                budget.max_torus_points
            )));
        }
        let h = grid.spacing;
        // kernel on the torus under the minimum-image metric
        let mut cov: Vec<Complex64> = Vec::with_capacity(total);
        let nd = torus_dims.len();
        let mut multi = vec![0usize; nd];
        for _ in 0..total {
            let mut d2 = 0.0;
            for (k, &m) in multi.iter().enumerate() {
                let n = torus_dims[k];
                let w = m.min(n - m); // minimum-image offset
                let dx = w as f64 * h;
                d2 += dx * dx;
            }
            cov.push(Complex64::new(kernel.eval(d2.sqrt()), 0.0));
            // row-major increment, last axis fastest
            for k in (0..nd).rev() {
                multi[k] += 1;
                if multi[k] < torus_dims[k] {
                    break;
                }
                multi[k] = 0;
            }
        }
        let fft = NdFft::new(&torus_dims);
        fft.forward(&mut cov);
        let mut clipped = 0.0;
        let mut total_mass = 0.0;
        let n_f = total as f64;
        let scale: Vec<f64> = cov
            .iter()
            .map(|lam| {
                let v = lam.re;
                total_mass += v.abs();
                if v < 0.0 {
                    clipped += -v;
                }
                (v.max(0.0) / n_f).sqrt()
            })
            .collect();
        let clipped_mass = if total_mass > 0.0 {
            clipped / total_mass
        } else {
            0.0
        };
        let mut warnings = Vec::new();
        if clipped_mass > CLIP_WARN_THRESHOLD {
            warnings.push(format!(
                "spectral synthesis clipped relative mass {clipped_mass:.3e}"
            ));
        }
        Ok(FieldSampler {
            grid: grid.clone(),
            kernel_id: kernel.id(),
            backend: Backend::Spectral {
                torus_dims,
                fft,
                scale,
            },
            clipped_mass,
            warnings,
        })
    }

    pub fn method(&self) -> &'static str {
        match self.backend {
            Backend::Spectral { .. } => "spectral",
            Backend::Dense { .. } => "dense",
        }
    }

    /// Draw the sample of trial `trial` under `seed`.
    pub fn sample(&self, seed: u64, trial: u64) -> GridField {
        let mut rng = trial_rng(seed, trial);
        let values = match &self.backend {
            Backend::Dense { root } => {
                let n = self.grid.len();
                let z: Vec<f64> = (0..n)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect();
                let zv = nalgebra::DVector::from_vec(z);
                (root * zv).data.into()
            }
            Backend::Spectral {
                torus_dims,
                fft,
                scale,
            } => {
                let total = scale.len();
                let mut buf: Vec<Complex64> = (0..total)
                    .map(|k| {
                        let a: f64 = StandardNormal.sample(&mut rng);
                        let b: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(a * scale[k], b * scale[k])
                    })
                    .collect();
                fft.inverse(&mut buf);
                // window extraction: grid index i maps to torus index i
                let mut out = Vec::with_capacity(self.grid.len());
                let nd = torus_dims.len();
                let mut multi = vec![0usize; nd];
                for _ in 0..self.grid.len() {
                    let mut idx = 0usize;
                    for k in 0..nd {
                        idx = idx * torus_dims[k] + multi[k];
                    }
                    out.push(buf[idx].re);
                    for k in (0..nd).rev() {
                        multi[k] += 1;
                        if multi[k] < self.grid.dims[k] {
                            break;
                        }
                        multi[k] = 0;
                    }
                }
                out
            }
        };
        GridField {
            grid: self.grid.clone(),
            values,
            seed: SeedRecord {
                seed,
                stream: trial,
            },
            provenance: Provenance {
                method: self.method().into(),
                kernel_id: self.kernel_id.clone(),
                split_scale: None,
                clipped_mass: self.clipped_mass,
                warnings: self.warnings.clone(),
            },
        }
    }
}

/// One-shot convenience wrapper: build a sampler and draw stream 0.
pub fn sample_field(kernel: &Kernel, grid: &Grid, seed: u64) -> Result<GridField> {
    let sampler = FieldSampler::new(kernel, grid, &SamplerBudget::default())?;
    Ok(sampler.sample(seed, 0))
}
