//! Connection events on excursion sets: geometry, detection, diameters.

use super::label::{ComponentLabeling, NO_LABEL};
use crate::error::{Error, Result};
use crate::sampler::Grid;
use std::collections::VecDeque;

/// Event geometry. Arm- and annulus-type events are centered at the origin;
/// crossings anchor at the corner of the first orthant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    /// path of `{f <= l}` from `|x| <= r_in` (origin cell when r_in = 0) to
    /// `|x| >= r_out`
    Arm { r_in: f64, r_out: f64 },
    /// crossing of the annulus B(2r) \ B(r)
    Ann { r: f64 },
    /// left-right crossing of [0, r]^2
    Cross { r: f64 },
    /// left-right crossing of the tube [0, r] x [0, r^rho]^(d-1)
    Tube { r: f64, rho: f64 },
    /// path from the sphere |x| = r to the window boundary (finite-window
    /// stand-in for an arm to infinity)
    AnnInf { r: f64 },
}

impl EventKind {
    pub fn scale(&self) -> f64 {
        match *self {
            EventKind::Arm { r_out, .. } => r_out,
            EventKind::Ann { r } => r,
            EventKind::Cross { r } => r,
            EventKind::Tube { r, .. } => r,
            EventKind::AnnInf { r } => r,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            EventKind::Arm { r_in, .. } => format!("arm({r_in})"),
            EventKind::Ann { .. } => "ann".into(),
            EventKind::Cross { .. } => "cross".into(),
            EventKind::Tube { rho, .. } => format!("tube({rho})"),
            EventKind::AnnInf { .. } => "ann_inf".into(),
        }
    }

    /// Default grid carrying this event at spacing `h` (d = 2).
    pub fn default_grid(&self, h: f64) -> Result<Grid> {
        let snap = |x: f64| (x / h).ceil() * h;
        match *self {
            EventKind::Arm { r_out, .. } => Grid::centered_square(snap(r_out), h),
            EventKind::Ann { r } => Grid::centered_square(snap(2.0 * r), h),
            EventKind::AnnInf { r } => Grid::centered_square(snap(2.0 * r), h),
            EventKind::Cross { r } => {
                let e = snap(r);
                Grid::from_extents(&[e, e], h, vec![0.0, 0.0])
            }
            EventKind::Tube { r, rho } => {
                let ex = snap(r);
                let ey = snap(r.powf(rho)).max(2.0 * h);
                Grid::from_extents(&[ey, ex], h, vec![0.0, 0.0])
            }
        }
    }
}

/// An event bound to a level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventSpec {
    pub kind: EventKind,
    pub level: f64,
}

fn norm(c: &[f64]) -> f64 {
    c.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct RegionSets {
    /// cells in the event region, or None when the region is the full window
    mask: Option<Vec<bool>>,
    source: Vec<usize>,
    target: Vec<usize>,
}

fn region_sets(grid: &Grid, kind: &EventKind) -> Result<RegionSets> {
    let h = grid.spacing;
    let tol = 1e-9 * h.max(1.0);
    let n = grid.len();
    let coords: Vec<Vec<f64>> = (0..n).map(|i| grid.coord(i)).collect();
    let max_norm = coords.iter().map(|c| norm(c)).fold(0.0f64, f64::max);
    match *kind {
        EventKind::Arm { r_in, r_out } => {
            if max_norm + tol < r_out {
                return Err(Error::domain("window does not reach |x| = r_out"));
            }
            let source: Vec<usize> = if r_in == 0.0 {
                let idx = grid
                    .index_of_point(&vec![0.0; grid.dim()], 1e-9)
                    .ok_or_else(|| Error::domain("window does not contain the origin cell"))?;
                vec![idx]
            } else {
                (0..n).filter(|&i| norm(&coords[i]) <= r_in + tol).collect()
            };
            let target: Vec<usize> = (0..n)
                .filter(|&i| norm(&coords[i]) >= r_out - tol)
                .collect();
            if source.is_empty() || target.is_empty() {
                return Err(Error::domain("empty terminal set for arm event"));
            }
            Ok(RegionSets {
                mask: None,
                source,
                target,
            })
        }
        EventKind::Ann { r } => {
            if max_norm + tol < 2.0 * r {
                return Err(Error::domain("window does not contain B(2r)"));
            }
            let inside =
                |i: usize| norm(&coords[i]) >= r - tol && norm(&coords[i]) <= 2.0 * r + tol;
            let mask: Vec<bool> = (0..n).map(inside).collect();
            let source = (0..n)
                .filter(|&i| mask[i] && norm(&coords[i]) < r + h + tol)
                .collect();
            let target = (0..n)
                .filter(|&i| mask[i] && norm(&coords[i]) > 2.0 * r - h - tol)
                .collect();
            Ok(RegionSets {
                mask: Some(mask),
                source,
                target,
            })
        }
        EventKind::AnnInf { r } => {
            if max_norm <= r {
                return Err(Error::domain("window does not extend beyond |x| = r"));
            }
            let mask: Vec<bool> = (0..n).map(|i| norm(&coords[i]) >= r - tol).collect();
            let source: Vec<usize> = (0..n)
                .filter(|&i| mask[i] && norm(&coords[i]) < r + h + tol)
                .collect();
            let mut target = Vec::new();
            for idx in 0..n {
                if !mask[idx] {
                    continue;
                }
                let m = grid.multi_index(idx);
                if m.iter()
                    .zip(&grid.dims)
                    .any(|(&mi, &d)| mi == 0 || mi == d - 1)
                {
                    target.push(idx);
                }
            }
            Ok(RegionSets {
                mask: Some(mask),
                source,
                target,
            })
        }
        EventKind::Cross { r } | EventKind::Tube { r, .. } => {
            let sides: Vec<f64> = match *kind {
                EventKind::Cross { r } => vec![r; grid.dim()],
                EventKind::Tube { r, rho } => {
                    let mut s = vec![r.powf(rho); grid.dim()];
                    *s.last_mut().unwrap() = r;
                    s
                }
                _ => unreachable!(),
            };
            // region: coords within [0, side] per axis; crossing axis is the
            // last (fastest) one
            let inside = |i: usize| {
                coords[i]
                    .iter()
                    .zip(&sides)
                    .all(|(&x, &s)| x >= -tol && x <= s + tol)
            };
            let mask: Vec<bool> = (0..n).map(inside).collect();
            if !mask.iter().any(|&b| b) {
                return Err(Error::domain("event box does not intersect the window"));
            }
            let axis = grid.dim() - 1;
            let source: Vec<usize> = (0..n)
                .filter(|&i| mask[i] && coords[i][axis].abs() <= tol)
                .collect();
            let target: Vec<usize> = (0..n)
                .filter(|&i| mask[i] && (coords[i][axis] - r).abs() <= tol)
                .collect();
            if source.is_empty() || target.is_empty() {
                return Err(Error::domain("event box sides fall outside the window"));
            }
            Ok(RegionSets {
                mask: Some(mask),
                source,
                target,
            })
        }
    }
}

/// True iff one sub-level component within the event region intersects both
/// terminal sets.
pub fn detect_event(labeling: &ComponentLabeling, kind: &EventKind) -> Result<bool> {
    let sets = region_sets(&labeling.grid, kind)?;
    match sets.mask {
        None => {
            // full-window connectivity: compare component labels directly
            let mut hit = vec![false; labeling.component_count];
            for &i in &sets.source {
                let l = labeling.labels[i];
                if l != NO_LABEL {
                    hit[l as usize] = true;
                }
            }
            Ok(sets
                .target
                .iter()
                .any(|&i| labeling.labels[i] != NO_LABEL && hit[labeling.labels[i] as usize]))
        }
        Some(region) => {
            // restricted connectivity: BFS inside region AND sub-level
            let grid = &labeling.grid;
            let n = grid.len();
            let open: Vec<bool> = (0..n).map(|i| region[i] && labeling.below[i]).collect();
            let target: Vec<bool> = {
                let mut t = vec![false; n];
                for &i in &sets.target {
                    t[i] = true;
                }
                t
            };
            let nd = grid.dims.len();
            let mut strides = vec![1usize; nd];
            for k in (0..nd.saturating_sub(1)).rev() {
                strides[k] = strides[k + 1] * grid.dims[k + 1];
            }
            let mut seen = vec![false; n];
            let mut queue = VecDeque::new();
            for &i in &sets.source {
                if open[i] && !seen[i] {
                    seen[i] = true;
                    queue.push_back(i);
                }
            }
            while let Some(idx) = queue.pop_front() {
                if target[idx] {
                    return Ok(true);
                }
                let multi = grid.multi_index(idx);
                for k in 0..nd {
                    if multi[k] + 1 < grid.dims[k] {
                        let nb = idx + strides[k];
                        if open[nb] && !seen[nb] {
                            seen[nb] = true;
                            queue.push_back(nb);
                        }
                    }
                    if multi[k] > 0 {
                        let nb = idx - strides[k];
                        if open[nb] && !seen[nb] {
                            seen[nb] = true;
                            queue.push_back(nb);
                        }
                    }
                }
            }
            Ok(false)
        }
    }
}

/// Largest |x| over the cells of the component containing the origin cell;
/// `None` when the origin cell is above level. Drives coupled-in-R arm
/// indicators: the arm to radius R is present iff the reach is >= R.
pub fn origin_component_reach(labeling: &ComponentLabeling) -> Option<f64> {
    let grid = &labeling.grid;
    let origin = grid.index_of_point(&vec![0.0; grid.dim()], 1e-9)?;
    let label = labeling.labels[origin];
    if label == NO_LABEL {
        return None;
    }
    let mut reach = 0.0f64;
    for idx in 0..grid.len() {
        if labeling.labels[idx] == label {
            reach = reach.max(norm(&grid.coord(idx)));
        }
    }
    Some(reach)
}

/// Euclidean diameter of the largest component (by diameter) in physical
/// units. Components with at most 1000 cells are measured pairwise; larger
/// planar components via their convex hull (where the farthest pair lives).
pub fn largest_diameter(labeling: &ComponentLabeling) -> f64 {
    let grid = &labeling.grid;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); labeling.component_count];
    for idx in 0..grid.len() {
        let l = labeling.labels[idx];
        if l != NO_LABEL {
            groups[l as usize].push(idx);
        }
    }
    let mut best = 0.0f64;
    for cells in &groups {
        if cells.is_empty() {
            continue;
        }
        let pts: Vec<Vec<f64>> = cells.iter().map(|&i| grid.coord(i)).collect();
        let d = if pts.len() <= 1000 || grid.dim() != 2 {
            pairwise_diameter(&pts)
        } else {
            let planar: Vec<(f64, f64)> = pts.iter().map(|p| (p[0], p[1])).collect();
            hull_diameter(&planar)
        };
        best = best.max(d);
    }
    best
}

fn pairwise_diameter(pts: &[Vec<f64>]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in 0..i {
            let d2: f64 = pts[i]
                .iter()
                .zip(&pts[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            best = best.max(d2);
        }
    }
    best.sqrt()
}

fn hull_diameter(pts: &[(f64, f64)]) -> f64 {
    let hull = convex_hull(pts);
    let as_vec: Vec<Vec<f64>> = hull.iter().map(|&(x, y)| vec![x, y]).collect();
    pairwise_diameter(&as_vec)
}

/// Andrew monotone chain.
fn convex_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut p = pts.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &pt in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], pt) <= 0.0 {
            lower.pop();
        }
        lower.push(pt);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &pt in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], pt) <= 0.0 {
            upper.pop();
        }
        upper.push(pt);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percolation::label::excursion_components;
    use crate::sampler::{GridField, Provenance, SeedRecord};

    fn field_on(grid: Grid, values: Vec<f64>) -> GridField {
        GridField {
            grid,
            values,
            seed: SeedRecord { seed: 0, stream: 0 },
            provenance: Provenance {
                method: "fixture".into(),
                kernel_id: "fixture".into(),
                split_scale: None,
                clipped_mass: 0.0,
                warnings: vec![],
            },
        }
    }

    fn constant_field(grid: Grid, v: f64) -> GridField {
        let n = grid.len();
        field_on(grid, vec![v; n])
    }

    #[test]
    fn all_low_and_all_high() {
        for kind in [
            EventKind::Arm {
                r_in: 0.0,
                r_out: 3.0,
            },
            EventKind::Ann { r: 2.0 },
            EventKind::Cross { r: 4.0 },
            EventKind::Tube { r: 4.0, rho: 0.25 },
            EventKind::AnnInf { r: 2.0 },
        ] {
            let grid = kind.default_grid(0.5).unwrap();
            let low = excursion_components(&constant_field(grid.clone(), -1.0), 0.0);
            assert!(detect_event(&low, &kind).unwrap(), "{kind:?} all-low");
            let high = excursion_components(&constant_field(grid, 1.0), 0.0);
            assert!(!detect_event(&high, &kind).unwrap(), "{kind:?} all-high");
        }
    }

    #[test]
    fn monotone_path_fixture() {
        // 8x8 grid, unit spacing, origin at corner: a staircase path of low
        // cells from the left edge to the right edge
        let grid = Grid::new(vec![8, 8], 1.0, vec![0.0, 0.0]).unwrap();
        let mut values = vec![1.0; 64];
        let path = [
            (0usize, 0usize),
            (0, 1),
            (1, 1),
            (1, 2),
            (2, 2),
            (2, 3),
            (2, 4),
            (3, 4),
            (3, 5),
            (3, 6),
            (4, 6),
            (4, 7),
        ];
        for &(iy, ix) in &path {
            values[iy * 8 + ix] = -1.0;
        }
        let f = field_on(grid, values);
        let lab = excursion_components(&f, 0.0);
        assert!(detect_event(&lab, &EventKind::Cross { r: 7.0 }).unwrap());
        // arm from the origin cell: the path touches (0,0), so an arm to
        // radius 7 exists; after raising the origin cell it must fail
        assert!(detect_event(
            &lab,
            &EventKind::Arm {
                r_in: 0.0,
                r_out: 7.0
            }
        )
        .unwrap());
        let mut values2 = f.values.clone();
        values2[0] = 1.0;
        let f2 = field_on(f.grid.clone(), values2);
        let lab2 = excursion_components(&f2, 0.0);
        assert!(!detect_event(
            &lab2,
            &EventKind::Arm {
                r_in: 0.0,
                r_out: 7.0
            }
        )
        .unwrap());
    }

    #[test]
    fn annulus_crossing_requires_path_inside_annulus() {
        // ring path inside the annulus vs a radial path that detours through
        // the forbidden inner ball
        let grid = Grid::centered_square(4.0, 1.0).unwrap();
        let kind = EventKind::Ann { r: 2.0 };
        // radial spoke along +x from |x|=2 to |x|=4: crossing
        let mut values = vec![1.0; grid.len()];
        for ix in 0..=8 {
            let x = ix as f64 - 4.0;
            if (2.0..=4.0).contains(&x) {
                let idx = grid.index_of_point(&[x, 0.0], 1e-9).unwrap();
                values[idx] = -1.0;
            }
        }
        let lab = excursion_components(&field_on(grid.clone(), values), 0.0);
        assert!(detect_event(&lab, &kind).unwrap());
        // spoke broken at |x| = 3 with a detour through the inner ball: no
        let mut values = vec![1.0; grid.len()];
        for &x in &[2.0f64, 4.0] {
            let idx = grid.index_of_point(&[x, 0.0], 1e-9).unwrap();
            values[idx] = -1.0;
        }
        // path through the origin connecting them (outside the annulus)
        for ix in -2i64..=2 {
            let idx = grid.index_of_point(&[ix as f64, 1.0], 1e-9).unwrap();
            values[idx] = -1.0;
        }
        let lab = excursion_components(&field_on(grid, values), 0.0);
        assert!(!detect_event(&lab, &kind).unwrap());
    }

    #[test]
    fn diameter_fixtures() {
        let grid = Grid::new(vec![6, 6], 0.5, vec![0.0, 0.0]).unwrap();
        let none = excursion_components(&constant_field(grid.clone(), 1.0), 0.0);
        assert_eq!(largest_diameter(&none), 0.0);
        // straight row of 5 low cells: diameter (5-1) * h = 2
        let mut values = vec![1.0; 36];
        for ix in 0..5 {
            values[2 * 6 + ix] = -1.0;
        }
        let lab = excursion_components(&field_on(grid.clone(), values), 0.0);
        assert!((largest_diameter(&lab) - 2.0).abs() < 1e-12);
        // L-shape: legs 4 and 3 cells from a corner; farthest pair is the
        // hypotenuse sqrt(4^2 + 3^2) * h
        let mut values = vec![1.0; 36];
        for ix in 0..5 {
            values[ix] = -1.0;
        }
        for iy in 0..4 {
            values[iy * 6] = -1.0;
        }
        let lab = excursion_components(&field_on(grid, values), 0.0);
        assert!((largest_diameter(&lab) - 0.5 * 5.0).abs() < 1e-12);
    }

    #[test]
    fn hull_diameter_matches_pairwise() {
        // random-ish blob, checked against brute force
        let pts: Vec<(f64, f64)> = (0..500)
            .map(|i| {
                let a = (i as f64 * 0.7).sin() * 3.0;
                let b = (i as f64 * 1.3).cos() * 2.0;
                ((a * 4.0).round() / 4.0, (b * 4.0).round() / 4.0)
            })
            .collect();
        let brute = {
            let v: Vec<Vec<f64>> = pts.iter().map(|&(x, y)| vec![x, y]).collect();
            pairwise_diameter(&v)
        };
        assert!((hull_diameter(&pts) - brute).abs() < 1e-12);
    }

    #[test]
    fn geometry_out_of_window_errors() {
        let grid = Grid::centered_square(2.0, 0.5).unwrap();
        let lab = excursion_components(&constant_field(grid, -1.0), 0.0);
        assert!(detect_event(
            &lab,
            &EventKind::Arm {
                r_in: 0.0,
                r_out: 50.0
            }
        )
        .is_err());
    }
}
