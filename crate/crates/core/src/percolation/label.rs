//! Union-find labeling of excursion-set cells under face adjacency.

use crate::sampler::{Grid, GridField};

/// Disjoint-set forest over linear cell indices; roots are always the
/// smallest index in their set, so labels are platform-independent.
pub struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    pub fn find(&mut self, mut i: u32) -> u32 {
        while self.parent[i as usize] != i {
            let p = self.parent[i as usize];
            self.parent[i as usize] = self.parent[p as usize]; // path halving
            i = self.parent[i as usize];
        }
        i
    }

    /// Union keeping the smaller index as root.
    pub fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        if ra < rb {
            self.parent[rb as usize] = ra;
        } else {
            self.parent[ra as usize] = rb;
        }
    }
}

/// Component structure of `{f <= level}` on the grid.
pub struct ComponentLabeling {
    pub grid: Grid,
    pub level: f64,
    /// sub-level mask per cell
    pub below: Vec<bool>,
    /// component id per cell (`u32::MAX` above level); ids are contiguous
    /// from 0 in order of first appearance along the linear scan
    pub labels: Vec<u32>,
    pub component_count: usize,
    pub component_sizes: Vec<usize>,
}

pub const NO_LABEL: u32 = u32::MAX;

/// Label the excursion set `{f <= level}` under 2d face adjacency.
pub fn excursion_components(field: &GridField, level: f64) -> ComponentLabeling {
    let grid = field.grid.clone();
    let below: Vec<bool> = field.values.iter().map(|&v| v <= level).collect();
    let labels = label_mask(&grid, &below);
    let component_count = labels
        .iter()
        .filter(|&&l| l != NO_LABEL)
        .map(|&l| l + 1)
        .max()
        .unwrap_or(0) as usize;
    let mut component_sizes = vec![0usize; component_count];
    for &l in &labels {
        if l != NO_LABEL {
            component_sizes[l as usize] += 1;
        }
    }
    ComponentLabeling {
        grid,
        level,
        below,
        labels,
        component_count,
        component_sizes,
    }
}

/// Union-find labeling of an arbitrary boolean mask on the grid.
pub fn label_mask(grid: &Grid, mask: &[bool]) -> Vec<u32> {
    let n = grid.len();
    debug_assert_eq!(mask.len(), n);
    let mut uf = UnionFind::new(n);
    let nd = grid.dims.len();
    // strides for row-major layout
    let mut strides = vec![1usize; nd];
    for k in (0..nd.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * grid.dims[k + 1];
    }
    let mut multi = vec![0usize; nd];
    for idx in 0..n {
        if mask[idx] {
            for k in 0..nd {
                if multi[k] + 1 < grid.dims[k] {
                    let nb = idx + strides[k];
                    if mask[nb] {
                        uf.union(idx as u32, nb as u32);
                    }
                }
            }
        }
        for k in (0..nd).rev() {
            multi[k] += 1;
            if multi[k] < grid.dims[k] {
                break;
            }
            multi[k] = 0;
        }
    }
    let mut labels = vec![NO_LABEL; n];
    let mut next = 0u32;
    let mut root_label = vec![NO_LABEL; n];
    for idx in 0..n {
        if mask[idx] {
            let r = uf.find(idx as u32) as usize;
            if root_label[r] == NO_LABEL {
                root_label[r] = next;
                next += 1;
            }
            labels[idx] = root_label[r];
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{Provenance, SeedRecord};

    pub(crate) fn field_from(values: Vec<f64>, ny: usize, nx: usize) -> GridField {
        GridField {
            grid: Grid::new(vec![ny, nx], 1.0, vec![0.0, 0.0]).unwrap(),
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

    #[test]
    fn extreme_levels() {
        let f = field_from(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], 3, 3);
        let none = excursion_components(&f, -1.0);
        assert_eq!(none.component_count, 0);
        let all = excursion_components(&f, 100.0);
        assert_eq!(all.component_count, 1);
        assert_eq!(all.component_sizes[0], 9);
    }

    #[test]
    fn checkerboard_has_no_adjacency() {
        // 4x4 checkerboard: low cells are isolated under face adjacency
        let mut values = vec![1.0; 16];
        for iy in 0..4 {
            for ix in 0..4 {
                if (ix + iy) % 2 == 0 {
                    values[iy * 4 + ix] = -1.0;
                }
            }
        }
        let f = field_from(values, 4, 4);
        let lab = excursion_components(&f, 0.0);
        assert_eq!(lab.component_count, 8);
        assert!(lab.component_sizes.iter().all(|&s| s == 1));
    }

    #[test]
    fn labels_are_contiguous_and_scan_ordered() {
        let f = field_from(
            vec![
                -1.0, 1.0, -1.0, //
                1.0, 1.0, -1.0, //
                -1.0, 1.0, -1.0,
            ],
            3,
            3,
        );
        let lab = excursion_components(&f, 0.0);
        // components: {0}, {2,5,8}, {6}
        assert_eq!(lab.component_count, 3);
        assert_eq!(lab.labels[0], 0);
        assert_eq!(lab.labels[2], 1);
        assert_eq!(lab.labels[5], 1);
        assert_eq!(lab.labels[8], 1);
        assert_eq!(lab.labels[6], 2);
        assert_eq!(lab.labels[1], NO_LABEL);
    }
}
