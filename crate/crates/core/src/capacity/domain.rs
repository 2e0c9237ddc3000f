//! Discretized compact domains carrying energies and equilibrium measures.

use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DomainKind {
    Segment,
    Box,
    Ball,
    UnionOfBalls,
    CondensedSegment,
}

/// Cell geometry. One-dimensional cells are intervals along the first
/// coordinate axis (the only orientation the domains here need); square cells
/// are used for planar balls and boxes.
#[derive(Clone, Debug)]
pub enum Cells {
    OneD { intervals: Vec<(f64, f64)> },
    TwoD { centers: Vec<[f64; 2]>, side: f64 },
}

#[derive(Clone, Debug)]
pub struct DiscretizedDomain {
    pub kind: DomainKind,
    pub cells: Cells,
}

impl DiscretizedDomain {
    pub fn len(&self) -> usize {
        match &self.cells {
            Cells::OneD { intervals } => intervals.len(),
            Cells::TwoD { centers, .. } => centers.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest cell extent (interval length or square side).
    pub fn cell_size(&self) -> f64 {
        match &self.cells {
            Cells::OneD { intervals } => intervals
                .iter()
                .map(|(a, b)| b - a)
                .fold(0.0f64, f64::max),
            Cells::TwoD { side, .. } => *side,
        }
    }

    /// Center of cell `i` embedded in the plane.
    pub fn center(&self, i: usize) -> [f64; 2] {
        match &self.cells {
            Cells::OneD { intervals } => [0.5 * (intervals[i].0 + intervals[i].1), 0.0],
            Cells::TwoD { centers, .. } => centers[i],
        }
    }

    /// Index of the cell containing `x`, if any.
    pub fn containing_cell(&self, x: [f64; 2]) -> Option<usize> {
        match &self.cells {
            Cells::OneD { intervals } => {
                if x[1].abs() > 1e-12 {
                    return None;
                }
                intervals
                    .iter()
                    .position(|&(a, b)| x[0] >= a - 1e-12 && x[0] <= b + 1e-12)
            }
            Cells::TwoD { centers, side } => centers.iter().position(|c| {
                (x[0] - c[0]).abs() <= 0.5 * side + 1e-12
                    && (x[1] - c[1]).abs() <= 0.5 * side + 1e-12
            }),
        }
    }

    /// Segment [0, length] split into cells of size at most `max_cell`.
    pub fn segment(length: f64, max_cell: f64) -> Result<Self> {
        Self::segment_at(0.0, length, max_cell, DomainKind::Segment)
    }

    fn segment_at(offset: f64, length: f64, max_cell: f64, kind: DomainKind) -> Result<Self> {
        if !(length > 0.0 && max_cell > 0.0) {
            return Err(Error::domain("segment needs positive length and cell size"));
        }
        let n = (length / max_cell).ceil().max(2.0) as usize;
        let h = length / n as f64;
        let intervals = (0..n)
            .map(|i| (offset + i as f64 * h, offset + (i + 1) as f64 * h))
            .collect();
        Ok(DiscretizedDomain {
            kind,
            cells: Cells::OneD { intervals },
        })
    }

    /// Coarse-grained segment S_{s,r,R}: grains `i r + [0, s]` for
    /// `1 <= i < floor(R/r)`.
    pub fn condensed_segment(s: f64, r: f64, big_r: f64, max_cell: f64) -> Result<Self> {
        if !(0.0 <= s && s <= r && r <= big_r) {
            return Err(Error::Domain(format!(
                "condensed segment needs 0 <= s <= r <= R, got s={s}, r={r}, R={big_r}"
            )));
        }
        let count = (big_r / r).floor() as usize;
        if count < 2 {
            return Err(Error::domain("condensed segment has no grains: R/r < 2"));
        }
        let mut intervals = Vec::new();
        for i in 1..count {
            let offset = i as f64 * r;
            if s == 0.0 {
                intervals.push((offset, offset));
            } else {
                let n = (s / max_cell).ceil().max(1.0) as usize;
                let h = s / n as f64;
                for j in 0..n {
                    intervals.push((offset + j as f64 * h, offset + (j + 1) as f64 * h));
                }
            }
        }
        Ok(DiscretizedDomain {
            kind: DomainKind::CondensedSegment,
            cells: Cells::OneD { intervals },
        })
    }

    /// Planar ball of radius `radius` centered at `center`, as lattice squares.
    pub fn ball(center: [f64; 2], radius: f64, max_cell: f64) -> Result<Self> {
        let d = Self::union_of_balls(&[center], radius, max_cell)?;
        Ok(DiscretizedDomain {
            kind: DomainKind::Ball,
            cells: d.cells,
        })
    }

    /// Union of planar balls of common radius; cells are lattice squares whose
    /// centers lie inside one of the balls.
    pub fn union_of_balls(centers: &[[f64; 2]], radius: f64, max_cell: f64) -> Result<Self> {
        if centers.is_empty() || !(radius > 0.0 && max_cell > 0.0) {
            return Err(Error::domain("union of balls needs centers and radius > 0"));
        }
        let side = radius / (radius / max_cell).ceil();
        let mut cell_centers = Vec::new();
        let m = (radius / side).ceil() as i64 + 1;
        for c in centers {
            for iy in -m..=m {
                for ix in -m..=m {
                    let x = c[0] + (ix as f64) * side;
                    let y = c[1] + (iy as f64) * side;
                    let dx = x - c[0];
                    let dy = y - c[1];
                    if dx * dx + dy * dy <= radius * radius {
                        cell_centers.push([x, y]);
                    }
                }
            }
        }
        Ok(DiscretizedDomain {
            kind: DomainKind::UnionOfBalls,
            cells: Cells::TwoD {
                centers: cell_centers,
                side,
            },
        })
    }

    /// Axis-aligned box [0, a] x [0, b] as lattice squares.
    pub fn planar_box(a: f64, b: f64, max_cell: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && max_cell > 0.0) {
            return Err(Error::domain("box needs positive sides and cell size"));
        }
        let nx = (a / max_cell).ceil().max(2.0) as usize;
        let ny = (b / max_cell).ceil().max(1.0) as usize;
        let sx = a / nx as f64;
        let sy = b / ny as f64;
        let side = sx.min(sy);
        let nx = (a / side).round() as usize;
        let ny = (b / side).round() as usize;
        let mut centers = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                centers.push([(ix as f64 + 0.5) * side, (iy as f64 + 0.5) * side]);
            }
        }
        Ok(DiscretizedDomain {
            kind: DomainKind::Box,
            cells: Cells::TwoD { centers, side },
        })
    }
}
