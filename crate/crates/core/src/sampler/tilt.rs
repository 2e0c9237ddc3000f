//! Cameron–Martin tilting: shift the field by a multiple of an equilibrium
//! potential and carry the exact Radon–Nikodym log-weight.
//!
//! With shift s = a * Cap * h_mu (mu the equilibrium measure of the shift
//! domain), a sample g = f + s drawn from the shifted law estimates the base
//! law unbiasedly with weight exp(-xi_s(f) - ||s||^2/2), where
//! xi_s(f) = a * Cap * sum_i w_i f(x_i) is the Gaussian pairing evaluated on
//! the base field at the measure's atoms. ||s||^2 = a^2 Cap^2 E(mu) is taken
//! from the capacity solve so pairing and shift use the same Gram.
//! `a` is signed: negative amplitudes push the field down, which is the
//! useful direction for sub-level events.

use super::grid::{Grid, GridField};
use crate::capacity::CapacityResult;
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::sum::kahan_sum;
use rayon::prelude::*;

/// A tilted draw: the shifted field plus its exact log-weight.
#[derive(Clone, Debug)]
pub struct TiltedSample {
    pub field: GridField,
    pub log_weight: f64,
    pub shift_spec: String,
}

/// Precomputed shift field and pairing coefficients for one
/// (equilibrium measure, amplitude, grid) combination.
pub struct Tilter {
    shift_field: Vec<f64>,
    atom_indices: Vec<usize>,
    atom_coeffs: Vec<f64>,
    /// ||s||^2_H = amplitude^2 * Cap (for a converged equilibrium solve)
    pub norm_sq: f64,
    pub amplitude: f64,
    pub shift_spec: String,
}

impl Tilter {
    pub fn new(
        result: &CapacityResult,
        kernel: &Kernel,
        amplitude: f64,
        grid: &Grid,
    ) -> Result<Self> {
        Self::new_translated(result, kernel, amplitude, grid, [0.0, 0.0])
    }

    /// Tilter with the shift domain translated by `translation` (capacity is
    /// translation invariant, so domains are solved in canonical position and
    /// placed here).
    pub fn new_translated(
        result: &CapacityResult,
        kernel: &Kernel,
        amplitude: f64,
        grid: &Grid,
        translation: [f64; 2],
    ) -> Result<Self> {
        if !result.converged {
            return Err(Error::domain(
                "tilt rejected: capacity solve did not converge",
            ));
        }
        if grid.dim() > 2 {
            return Err(Error::domain("tilting implemented for d <= 2 grids"));
        }
        let cap = result.capacity;
        let mut atom_indices = Vec::new();
        let mut atom_coeffs = Vec::new();
        let mut atoms = Vec::new();
        for (i, &w) in result.measure.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let mut c = result.measure.domain.center(i);
            c[0] += translation[0];
            c[1] += translation[1];
            let point: Vec<f64> = (0..grid.dim()).map(|k| c[k]).collect();
            let idx = grid.index_of_point(&point, 1e-6).ok_or_else(|| {
                Error::Domain(format!(
                    "shift measure atom at {point:?} is not grid-representable"
                ))
            })?;
            atom_indices.push(idx);
            atom_coeffs.push(amplitude * cap * w);
            atoms.push(c);
        }
        let norm_sq = amplitude * amplitude * cap * cap * result.energy;
        let shift_field = if amplitude == 0.0 {
            vec![0.0; grid.len()]
        } else {
            let n = grid.len();
            let mut out = vec![0.0; n];
            out.par_iter_mut().enumerate().for_each(|(idx, slot)| {
                let p = grid.coord(idx);
                let terms: Vec<f64> = atoms
                    .iter()
                    .zip(&atom_coeffs)
                    .map(|(a, &c)| {
                        let dx = p[0] - a[0];
                        let dy = if p.len() > 1 { p[1] - a[1] } else { -a[1] };
                        c * kernel.eval((dx * dx + dy * dy).sqrt())
                    })
                    .collect();
                *slot = kahan_sum(terms.into_iter());
            });
            out
        };
        let shift_spec = format!(
            "amplitude {amplitude} on {:?} ({} atoms)",
            result.measure.domain.kind,
            atom_indices.len()
        );
        Ok(Tilter {
            shift_field,
            atom_indices,
            atom_coeffs,
            norm_sq,
            amplitude,
            shift_spec,
        })
    }

    /// Zero tilt on a grid: the identity, with log-weight 0.
    pub fn zero(grid: &Grid) -> Tilter {
        Tilter {
            shift_field: vec![0.0; grid.len()],
            atom_indices: Vec::new(),
            atom_coeffs: Vec::new(),
            norm_sq: 0.0,
            amplitude: 0.0,
            shift_spec: "amplitude 0".into(),
        }
    }

    /// Log-weight of a base draw, before shifting.
    pub fn log_weight(&self, base: &GridField) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let xi = kahan_sum(
            self.atom_indices
                .iter()
                .zip(&self.atom_coeffs)
                .map(|(&idx, &c)| c * base.values[idx]),
        );
        -xi - 0.5 * self.norm_sq
    }

    /// Shift a base draw and attach the weight.
    pub fn tilt(&self, mut base: GridField) -> TiltedSample {
        let log_weight = self.log_weight(&base);
        if self.amplitude != 0.0 {
            for (v, s) in base.values.iter_mut().zip(&self.shift_field) {
                *v += s;
            }
        }
        TiltedSample {
            field: base,
            log_weight,
            shift_spec: self.shift_spec.clone(),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{capacity, DiscretizedDomain, SolveOptions};
    use crate::kernels::Kernel;
    use crate::sampler::spectral::{FieldSampler, SamplerBudget};

    fn grid_aligned_segment(len: f64, h: f64) -> DiscretizedDomain {
        // cells centered on grid points k h, so atoms are grid-representable
        let n = (len / h).round() as usize + 1;
        let intervals = (0..n)
            .map(|k| {
                let c = k as f64 * h;
                (c - 0.5 * h, c + 0.5 * h)
            })
            .collect();
        DiscretizedDomain {
            kind: crate::capacity::DomainKind::Segment,
            cells: crate::capacity::Cells::OneD { intervals },
        }
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let kernel = Kernel::cauchy(0.5, 2).unwrap();
        let grid = Grid::centered_square(4.0, 0.5).unwrap();
        let dom = grid_aligned_segment(2.0, 0.5);
        let cap = capacity(dom, &kernel, &SolveOptions::default()).unwrap();
        let tilter = Tilter::new(&cap, &kernel, 0.0, &grid).unwrap();
        let sampler = FieldSampler::new(&kernel, &grid, &SamplerBudget::default()).unwrap();
        let base = sampler.sample(3, 0);
        let copy = base.values.clone();
        let t = tilter.tilt(base);
        assert_eq!(t.log_weight, 0.0);
        assert_eq!(t.field.values, copy);
    }

    #[test]
    fn norm_sq_matches_capacity_identity() {
        let kernel = Kernel::cauchy(0.5, 2).unwrap();
        let grid = Grid::centered_square(4.0, 0.5).unwrap();
        let dom = grid_aligned_segment(2.0, 0.5);
        let cap = capacity(dom, &kernel, &SolveOptions::default()).unwrap();
        let tilter = Tilter::new(&cap, &kernel, -1.5, &grid).unwrap();
        // ||s||^2 = a^2 Cap since Cap * energy = 1 at convergence
        let expect = 1.5 * 1.5 * cap.capacity;
        assert!(
            (tilter.norm_sq - expect).abs() < 1e-6 * expect,
            "{} vs {expect}",
            tilter.norm_sq
        );
    }

    #[test]
    fn off_grid_atoms_are_rejected() {
        let kernel = Kernel::cauchy(0.5, 2).unwrap();
        let grid = Grid::centered_square(4.0, 0.5).unwrap();
        // cells NOT centered on lattice points
        let dom = DiscretizedDomain::segment(2.0, 0.5).unwrap();
        let cap = capacity(dom, &kernel, &SolveOptions::default()).unwrap();
        assert!(Tilter::new(&cap, &kernel, -1.0, &grid).is_err());
    }

    #[test]
    fn weights_have_unit_mean() {
        // E[exp(log_weight)] = 1 over base draws (martingale identity)
        let kernel = Kernel::cauchy(1.0, 2).unwrap();
        let grid = Grid::centered_square(4.0, 0.5).unwrap();
        let dom = grid_aligned_segment(2.0, 0.5);
        let cap = capacity(dom, &kernel, &SolveOptions::default()).unwrap();
        let tilter = Tilter::new(&cap, &kernel, -0.8, &grid).unwrap();
        let sampler = FieldSampler::new(&kernel, &grid, &SamplerBudget::default()).unwrap();
        let n = 4000;
        let ws: Vec<f64> = (0..n)
            .map(|t| tilter.log_weight(&sampler.sample(77, t)).exp())
            .collect();
        let mean = ws.iter().sum::<f64>() / n as f64;
        let var = ws.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - 1.0).abs() < 3.0 * se,
            "mean {mean}, se {se}"
        );
    }
}
