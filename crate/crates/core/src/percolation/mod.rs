//! Excursion-set percolation: labeling, connection events, and Monte Carlo
//! estimation of their probabilities.
//!
//! Connectivity is lattice face-adjacency on sub-level grid cells (site
//! percolation on the sampling grid); the default spacing h = 0.25 keeps the
//! level lines of the smooth fields resolved, and grid bias is controlled by
//! the h-refinement acceptance check. Trials are embarrassingly parallel
//! with per-trial RNG streams; reductions run over trial-indexed arrays so
//! results do not depend on thread scheduling.
//!
//! CSV row schema emitted by the `percolate` pipeline:
//! `kernel,alpha,gamma,event,level,R,method,trials,ess,p_hat,se,ci_lo,ci_hi,seed`.

mod estimate;
mod events;
mod label;

pub use estimate::{
    correlation_length, grid_aligned_segment, is_estimate, mc_estimate, mc_estimate_arm_multi_r,
    mc_estimate_levels, wilson_interval, Estimate, IsConfig, XiEstimate, MIN_RELIABLE_ESS,
};
pub use events::{detect_event, largest_diameter, origin_component_reach, EventKind, EventSpec};
pub use label::{excursion_components, label_mask, ComponentLabeling, UnionFind, NO_LABEL};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;
    use crate::sampler::Grid;

    /// Brute-force BFS reference labeling for the property test.
    fn bfs_components(grid: &Grid, mask: &[bool]) -> Vec<u32> {
        let n = grid.len();
        let mut labels = vec![NO_LABEL; n];
        let mut next = 0u32;
        let nd = grid.dims.len();
        let mut strides = vec![1usize; nd];
        for k in (0..nd.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * grid.dims[k + 1];
        }
        for start in 0..n {
            if !mask[start] || labels[start] != NO_LABEL {
                continue;
            }
            let mut queue = std::collections::VecDeque::from([start]);
            labels[start] = next;
            while let Some(idx) = queue.pop_front() {
                let multi = grid.multi_index(idx);
                for k in 0..nd {
                    let mut push = |nb: usize| {
                        if mask[nb] && labels[nb] == NO_LABEL {
                            labels[nb] = next;
                            queue.push_back(nb);
                        }
                    };
                    if multi[k] + 1 < grid.dims[k] {
                        push(idx + strides[k]);
                    }
                    if multi[k] > 0 {
                        push(idx - strides[k]);
                    }
                }
            }
            next += 1;
        }
        labels
    }

    fn same_partition(a: &[u32], b: &[u32]) -> bool {
        // labels may differ by renaming; compare the induced partitions
        let mut map_ab = std::collections::HashMap::new();
        let mut map_ba = std::collections::HashMap::new();
        for (&la, &lb) in a.iter().zip(b.iter()) {
            if (la == NO_LABEL) != (lb == NO_LABEL) {
                return false;
            }
            if la == NO_LABEL {
                continue;
            }
            if *map_ab.entry(la).or_insert(lb) != lb {
                return false;
            }
            if *map_ba.entry(lb).or_insert(la) != la {
                return false;
            }
        }
        true
    }

    #[test]
    fn labeling_matches_bfs_on_random_masks() {
        use rand::Rng;
        let grid = Grid::new(vec![8, 8], 1.0, vec![0.0, 0.0]).unwrap();
        let mut rng = crate::rng::trial_rng(1234, 0);
        for _case in 0..1000 {
            let mask: Vec<bool> = (0..64).map(|_| rng.gen::<f64>() < 0.5).collect();
            let ours = label_mask(&grid, &mask);
            let reference = bfs_components(&grid, &mask);
            assert!(same_partition(&ours, &reference));
        }
    }

    #[test]
    fn coupled_levels_are_monotone_exactly() {
        let kernel = Kernel::cauchy(1.0, 2).unwrap();
        let kind = EventKind::Cross { r: 4.0 };
        let grid = kind.default_grid(0.5).unwrap();
        let levels = [-1.0, -0.5, 0.0, 0.5];
        let ests = mc_estimate_levels(&kernel, &grid, &kind, &levels, 400, 7).unwrap();
        for w in ests.windows(2) {
            assert!(w[0].p_hat <= w[1].p_hat, "{} > {}", w[0].p_hat, w[1].p_hat);
        }
    }

    #[test]
    fn coupled_radii_are_monotone_exactly() {
        let kernel = Kernel::cauchy(1.0, 2).unwrap();
        let grid = Grid::centered_square(8.0, 0.5).unwrap();
        let ests =
            mc_estimate_arm_multi_r(&kernel, &grid, -0.3, &[2.0, 4.0, 8.0], 400, 11).unwrap();
        for w in ests.windows(2) {
            assert!(w[0].p_hat >= w[1].p_hat);
        }
    }

    #[test]
    fn zero_amplitude_is_matches_naive_bitwise() {
        let kernel = Kernel::cauchy(1.0, 2).unwrap();
        let spec = EventSpec {
            kind: EventKind::Cross { r: 4.0 },
            level: 0.0,
        };
        let grid = spec.kind.default_grid(0.5).unwrap();
        let naive = mc_estimate(&kernel, &grid, &spec, 300, 5).unwrap();
        let cfg = IsConfig {
            level_target: 0.0,
            ..Default::default()
        };
        let (is, _) = is_estimate(&kernel, &grid, &spec, 300, 5, &cfg).unwrap();
        assert_eq!(naive.p_hat.to_bits(), is.p_hat.to_bits());
        assert_eq!(naive.weighted_hits, is.weighted_hits);
    }

    #[test]
    fn far_tail_level_never_hits() {
        let kernel = Kernel::cauchy(1.0, 2).unwrap();
        let spec = EventSpec {
            kind: EventKind::Cross { r: 4.0 },
            level: -10.0,
        };
        let grid = spec.kind.default_grid(0.5).unwrap();
        let est = mc_estimate(&kernel, &grid, &spec, 200, 3).unwrap();
        assert_eq!(est.p_hat, 0.0);
    }

    #[test]
    fn is_estimate_agrees_with_naive_where_naive_works() {
        // moderately rare crossing: naive and tilted estimates must agree
        let kernel = Kernel::cauchy(0.5, 2).unwrap();
        let spec = EventSpec {
            kind: EventKind::Cross { r: 6.0 },
            level: -0.75,
        };
        let grid = spec.kind.default_grid(0.25).unwrap();
        let naive = mc_estimate(&kernel, &grid, &spec, 3000, 17).unwrap();
        let (is, _) = is_estimate(&kernel, &grid, &spec, 3000, 18, &IsConfig::default()).unwrap();
        let tol = 3.0 * (naive.se * naive.se + is.se * is.se).sqrt();
        assert!(
            (naive.p_hat - is.p_hat).abs() < tol,
            "naive {} ({}), is {} ({}), ess {}",
            naive.p_hat,
            naive.se,
            is.p_hat,
            is.se,
            is.ess
        );
        assert!(!is.flagged, "ess {}", is.ess);
    }
}
