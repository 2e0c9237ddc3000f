//! Row-major n-dimensional FFT on top of rustfft's 1-D plans.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Smallest 5-smooth size >= n (fast FFT lengths).
pub fn next_fft_size(n: usize) -> usize {
    let mut m = n.max(2);
    loop {
        let mut k = m;
        for p in [2usize, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

#[derive(Clone)]
pub struct NdFft {
    dims: Vec<usize>,
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
}

impl NdFft {
    pub fn new(dims: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = dims
            .iter()
            .map(|&n| planner.plan_fft_forward(n))
            .collect();
        let inv = dims
            .iter()
            .map(|&n| planner.plan_fft_inverse(n))
            .collect();
        NdFft {
            dims: dims.to_vec(),
            fwd,
            inv,
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    /// Unnormalized inverse transform in place (scale by 1/N for a round trip).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        assert_eq!(data.len(), self.len());
        let nd = self.dims.len();
        for axis in 0..nd {
            let plan = if forward {
                &self.fwd[axis]
            } else {
                &self.inv[axis]
            };
            let len = self.dims[axis];
            let stride: usize = self.dims[axis + 1..].iter().product();
            let outer: usize = self.dims[..axis].iter().product();
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            if stride == 1 {
                for chunk in data.chunks_exact_mut(len) {
                    plan.process_with_scratch(chunk, &mut scratch);
                }
            } else {
                let mut line = vec![Complex64::default(); len];
                for o in 0..outer {
                    let base_o = o * len * stride;
                    for i in 0..stride {
                        let base = base_o + i;
                        for k in 0..len {
                            line[k] = data[base + k * stride];
                        }
                        plan.process_with_scratch(&mut line, &mut scratch);
                        for k in 0..len {
                            data[base + k * stride] = line[k];
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_sizes() {
        assert_eq!(next_fft_size(17), 18);
        assert_eq!(next_fft_size(128), 128);
        assert_eq!(next_fft_size(1025), 1080);
    }

    #[test]
    fn round_trip_2d() {
        let dims = [6usize, 10];
        let fft = NdFft::new(&dims);
        let n = fft.len();
        let orig: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        fft.forward(&mut data);
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b * n as f64).norm() < 1e-10);
        }
    }

    #[test]
    fn matches_direct_dft_1d() {
        let dims = [8usize];
        let fft = NdFft::new(&dims);
        let orig: Vec<Complex64> = (0..8)
            .map(|i| Complex64::new(i as f64, -(i as f64) * 0.5))
            .collect();
        let mut data = orig.clone();
        fft.forward(&mut data);
        for k in 0..8 {
            let mut acc = Complex64::default();
            for (j, &x) in orig.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (k * j) as f64 / 8.0;
                acc += x * Complex64::new(ang.cos(), ang.sin());
            }
            assert!((acc - data[k]).norm() < 1e-10);
        }
    }
}
