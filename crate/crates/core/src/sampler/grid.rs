//! Regular grids and sampled fields.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Regular lattice with uniform spacing, row-major indexing (last axis
/// fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dims: Vec<usize>,
    pub spacing: f64,
    pub origin: Vec<f64>,
}

impl Grid {
    pub fn new(dims: Vec<usize>, spacing: f64, origin: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&n| n < 2) {
            return Err(Error::domain("grid needs >= 2 points per axis"));
        }
        if !(spacing > 0.0) {
            return Err(Error::domain("grid spacing must be positive"));
        }
        if origin.len() != dims.len() {
            return Err(Error::domain("origin/dims dimension mismatch"));
        }
        Ok(Grid {
            dims,
            spacing,
            origin,
        })
    }

    /// Grid covering `[origin_i, origin_i + extent_i]` with `extent/spacing`
    /// an integer per axis.
    pub fn from_extents(extents: &[f64], spacing: f64, origin: Vec<f64>) -> Result<Self> {
        let mut dims = Vec::with_capacity(extents.len());
        for &e in extents {
            let steps = e / spacing;
            if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                return Err(Error::Domain(format!(
                    "extent {e} is not an integer multiple of spacing {spacing}"
                )));
            }
            dims.push(steps.round() as usize + 1);
        }
        Grid::new(dims, spacing, origin)
    }

    /// Square window [-half, half]^2.
    pub fn centered_square(half: f64, spacing: f64) -> Result<Self> {
        Grid::from_extents(&[2.0 * half, 2.0 * half], spacing, vec![-half, -half])
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extent(&self, axis: usize) -> f64 {
        (self.dims[axis] - 1) as f64 * self.spacing
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dims.len());
        let mut idx = 0;
        for (k, &m) in multi.iter().enumerate() {
            debug_assert!(m < self.dims[k]);
            idx = idx * self.dims[k] + m;
        }
        idx
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut multi = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            multi[k] = idx % self.dims[k];
            idx /= self.dims[k];
        }
        multi
    }

    pub fn coord(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(k, &m)| self.origin[k] + m as f64 * self.spacing)
            .collect()
    }

    /// Grid index of the point at physical position `x`, if it lies on the
    /// lattice within `tol * spacing`.
    pub fn index_of_point(&self, x: &[f64], tol: f64) -> Option<usize> {
        let mut multi = Vec::with_capacity(self.dims.len());
        for k in 0..self.dims.len() {
            let steps = (x[k] - self.origin[k]) / self.spacing;
            let r = steps.round();
            if (steps - r).abs() > tol || r < 0.0 || (r as usize) >= self.dims[k] {
                return None;
            }
            multi.push(r as usize);
        }
        Some(self.index(&multi))
    }
}

/// Seed record binding a field to its generator identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub stream: u64,
}

/// How a field was generated, plus numeric health diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    pub kernel_id: String,
    /// local/global split scale L, when the field is one half of a split
    pub split_scale: Option<f64>,
    /// relative spectral mass removed by nonnegative clipping
    pub clipped_mass: f64,
    pub warnings: Vec<String>,
}

/// A field sample on a regular lattice.
#[derive(Clone, Debug)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub seed: SeedRecord,
    pub provenance: Provenance,
}

impl GridField {
    pub fn value(&self, multi: &[usize]) -> f64 {
        self.values[self.grid.index(multi)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extents_round_trip() {
        let g = Grid::from_extents(&[4.0, 2.0], 0.25, vec![0.0, 0.0]).unwrap();
        assert_eq!(g.dims, vec![17, 9]);
        assert_eq!(g.len(), 17 * 9);
        assert!((g.extent(0) - 4.0).abs() < 1e-12);
        assert!(Grid::from_extents(&[1.0], 0.3, vec![0.0]).is_err());
    }

    #[test]
    fn indexing_round_trip() {
        let g = Grid::new(vec![4, 7, 3], 0.5, vec![0.0; 3]).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.index(&g.multi_index(idx)), idx);
        }
        let c = g.coord(g.index(&[2, 3, 1]));
        assert_eq!(c, vec![1.0, 1.5, 0.5]);
    }

    #[test]
    fn point_lookup() {
        let g = Grid::centered_square(4.0, 0.25).unwrap();
        let idx = g.index_of_point(&[0.0, 0.0], 1e-9).unwrap();
        assert_eq!(g.coord(idx), vec![0.0, 0.0]);
        assert!(g.index_of_point(&[0.1, 0.0], 1e-9).is_none());
        assert!(g.index_of_point(&[97.0, 0.0], 1e-9).is_none());
    }
}
