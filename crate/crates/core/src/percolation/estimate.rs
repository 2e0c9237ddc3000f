//! Monte Carlo estimation of connection-event probabilities, naive and
//! importance-sampled, plus the correlation-length search.

use super::events::{detect_event, origin_component_reach, EventKind, EventSpec};
use super::label::excursion_components;
use crate::capacity::{capacity, CapacityResult, DiscretizedDomain, SolveOptions};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::rng::derive_seed;
use crate::sampler::{FieldSampler, Grid, SamplerBudget, Tilter};
use crate::sum::{kahan_sum, pairwise_sum};
use rayon::prelude::*;

const Z95: f64 = 1.959_963_984_540_054;

/// Minimum effective sample size below which an IS estimate is flagged.
pub const MIN_RELIABLE_ESS: f64 = 30.0;

/// A probability estimate with its uncertainty.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub kernel_id: String,
    pub event: String,
    pub level: f64,
    pub scale: f64,
    pub method: String,
    pub trials: usize,
    /// raw hit count (naive) or weighted hit sum (importance sampling)
    pub weighted_hits: f64,
    pub p_hat: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub ess: f64,
    pub flagged: bool,
    pub seed: u64,
}

/// Wilson 95% interval for a binomial proportion.
pub fn wilson_interval(hits: f64, n: usize, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = hits / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn summarize(
    kernel: &Kernel,
    spec: &EventSpec,
    seed: u64,
    weights_hits: &[(f64, bool)],
    method: &str,
    importance: bool,
) -> Estimate {
    let n = weights_hits.len();
    let nf = n as f64;
    let wh: Vec<f64> = weights_hits
        .iter()
        .map(|&(w, h)| if h { w } else { 0.0 })
        .collect();
    let weighted_hits = pairwise_sum(&wh);
    let p_hat = weighted_hits / nf;
    let var = kahan_sum(wh.iter().map(|&x| (x - p_hat) * (x - p_hat))) / (nf - 1.0);
    let se = (var / nf).sqrt();
    let (ci_lo, ci_hi, ess) = if importance {
        let sw = kahan_sum(weights_hits.iter().map(|&(w, _)| w));
        let sw2 = kahan_sum(weights_hits.iter().map(|&(w, _)| w * w));
        let ess = if sw2 > 0.0 { sw * sw / sw2 } else { 0.0 };
        (
            (p_hat - Z95 * se).max(0.0),
            p_hat + Z95 * se,
            ess,
        )
    } else {
        let (lo, hi) = wilson_interval(weighted_hits, n, Z95);
        (lo, hi, nf)
    };
    Estimate {
        kernel_id: kernel.id(),
        event: spec.kind.name(),
        level: spec.level,
        scale: spec.kind.scale(),
        method: method.into(),
        trials: n,
        weighted_hits,
        p_hat,
        se,
        ci_lo,
        ci_hi,
        ess,
        flagged: importance && ess < MIN_RELIABLE_ESS,
        seed,
    }
}

fn run_trials(
    sampler: &FieldSampler,
    tilter: &Tilter,
    spec: &EventSpec,
    trials: usize,
    seed: u64,
) -> Result<Vec<(f64, bool)>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let base = sampler.sample(seed, t);
            let log_w = tilter.log_weight(&base);
            let sample = tilter.tilt(base);
            let lab = excursion_components(&sample.field, spec.level);
            let hit = detect_event(&lab, &spec.kind)?;
            Ok((log_w.exp(), hit))
        })
        .collect()
}

/// Naive Monte Carlo estimate with a Wilson 95% interval.
pub fn mc_estimate(
    kernel: &Kernel,
    grid: &Grid,
    spec: &EventSpec,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    if trials < 100 {
        return Err(Error::domain("need at least 100 trials"));
    }
    let sampler = FieldSampler::new(kernel, grid, &SamplerBudget::default())?;
    let tilter = Tilter::zero(grid);
    let out = run_trials(&sampler, &tilter, spec, trials, seed)?;
    Ok(summarize(kernel, spec, seed, &out, "naive", false))
}

/// Coupled-level naive estimates: one field per trial evaluated at every
/// level, so the indicator (and hence p_hat) is nondecreasing in the level
/// exactly.
pub fn mc_estimate_levels(
    kernel: &Kernel,
    grid: &Grid,
    kind: &EventKind,
    levels: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if trials < 100 {
        return Err(Error::domain("need at least 100 trials"));
    }
    let sampler = FieldSampler::new(kernel, grid, &SamplerBudget::default())?;
    let rows: Vec<Vec<bool>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let field = sampler.sample(seed, t);
            levels
                .iter()
                .map(|&l| {
                    let lab = excursion_components(&field, l);
                    detect_event(&lab, kind)
                })
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<_>>()?;
    Ok(levels
        .iter()
        .enumerate()
        .map(|(j, &level)| {
            let wh: Vec<(f64, bool)> = rows.iter().map(|r| (1.0, r[j])).collect();
            summarize(
                kernel,
                &EventSpec { kind: *kind, level },
                seed,
                &wh,
                "naive",
                false,
            )
        })
        .collect())
}

/// Coupled-in-R arm estimates from one window: per trial, the reach of the
/// origin component decides every radius at once, so p_hat is nonincreasing
/// in R exactly.
pub fn mc_estimate_arm_multi_r(
    kernel: &Kernel,
    grid: &Grid,
    level: f64,
    r_list: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if trials < 100 {
        return Err(Error::domain("need at least 100 trials"));
    }
    let sampler = FieldSampler::new(kernel, grid, &SamplerBudget::default())?;
    let reaches: Vec<Option<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let field = sampler.sample(seed, t);
            let lab = excursion_components(&field, level);
            origin_component_reach(&lab)
        })
        .collect();
    Ok(r_list
        .iter()
        .map(|&r| {
            let wh: Vec<(f64, bool)> = reaches
                .iter()
                .map(|reach| (1.0, reach.map_or(false, |x| x >= r)))
                .collect();
            summarize(
                kernel,
                &EventSpec {
                    kind: EventKind::Arm {
                        r_in: 0.0,
                        r_out: r,
                    },
                    level,
                },
                seed,
                &wh,
                "naive",
                false,
            )
        })
        .collect())
}

/// Importance-sampling configuration.
pub struct IsConfig {
    /// Target level of the tilt; the shift amplitude is `level - target`.
    /// Defaults to the planar critical level 0.
    pub level_target: f64,
    /// Shift domain and its placement; `None` uses the straight segment
    /// joining the event's terminal sets, discretized on grid points.
    pub shift_domain: Option<(DiscretizedDomain, [f64; 2])>,
    pub solver: SolveOptions,
}

impl Default for IsConfig {
    fn default() -> Self {
        IsConfig {
            level_target: 0.0,
            shift_domain: None,
            solver: SolveOptions {
                tol: 1e-6,
                max_iter: Some(4_000_000),
            },
        }
    }
}

/// Segment of grid-aligned point-centered cells along the first axis from
/// `from` to `to` (both snapped to the lattice).
pub fn grid_aligned_segment(from: f64, to: f64, h: f64) -> Result<DiscretizedDomain> {
    if !(to > from) {
        return Err(Error::domain("segment needs to > from"));
    }
    let k0 = (from / h).round() as i64;
    let k1 = (to / h).round() as i64;
    if k1 - k0 < 1 {
        return Err(Error::domain("segment shorter than one grid step"));
    }
    let intervals = (k0..=k1)
        .map(|k| {
            let c = k as f64 * h;
            (c - 0.5 * h, c + 0.5 * h)
        })
        .collect();
    Ok(DiscretizedDomain {
        kind: crate::capacity::DomainKind::Segment,
        cells: crate::capacity::Cells::OneD { intervals },
    })
}

/// Default tilt geometry: the straight segment joining the event's terminal
/// sets, placed on the lattice.
fn default_shift_domain(
    kind: &EventKind,
    grid: &Grid,
) -> Result<(DiscretizedDomain, [f64; 2])> {
    let h = grid.spacing;
    match *kind {
        EventKind::Arm { r_out, .. } => Ok((grid_aligned_segment(0.0, r_out, h)?, [0.0, 0.0])),
        EventKind::Ann { r } => Ok((grid_aligned_segment(r, 2.0 * r, h)?, [0.0, 0.0])),
        EventKind::AnnInf { r } => {
            let edge = grid.origin[0].abs().min(grid.extent(0) + grid.origin[0]);
            Ok((grid_aligned_segment(r, edge, h)?, [0.0, 0.0]))
        }
        EventKind::Cross { r } | EventKind::Tube { r, .. } => {
            // crossing axis is the last one; place the segment on the lattice
            // row nearest the middle of the transverse side
            let mid_steps = (grid.dims[0] - 1) / 2;
            let y = grid.origin[0] + mid_steps as f64 * h;
            Ok((grid_aligned_segment(0.0, r, h)?, [0.0, y]))
        }
    }
}

/// Importance-sampled estimate: tilt by `(level - target) * Cap * h_mu` on
/// the shift domain and average the reweighted indicators. With amplitude 0
/// this reproduces `mc_estimate` bit-exactly under shared seeds.
pub fn is_estimate(
    kernel: &Kernel,
    grid: &Grid,
    spec: &EventSpec,
    trials: usize,
    seed: u64,
    cfg: &IsConfig,
) -> Result<(Estimate, CapacityResult)> {
    if trials < 100 {
        return Err(Error::domain("need at least 100 trials"));
    }
    let amplitude = spec.level - cfg.level_target;
    if amplitude > 0.0 {
        return Err(Error::domain(
            "sub-level events need level <= target (downward tilt)",
        ));
    }
    let (domain, translation) = match &cfg.shift_domain {
        Some((d, t)) => (d.clone(), *t),
        None => default_shift_domain(&spec.kind, grid)?,
    };
    let cap = capacity(domain, kernel, &cfg.solver)?;
    let sampler = FieldSampler::new(kernel, grid, &SamplerBudget::default())?;
    let tilter = Tilter::new_translated(&cap, kernel, amplitude, grid, translation)?;
    let out = run_trials(&sampler, &tilter, spec, trials, seed)?;
    Ok((summarize(kernel, spec, seed, &out, "is", true), cap))
}

/// One level's correlation-length search result.
#[derive(Clone, Debug)]
pub struct XiEstimate {
    pub level: f64,
    /// smallest tested R at which the crossing upper confidence bound drops
    /// below eps; `None` when censored by the R budget
    pub xi: Option<f64>,
    /// largest tested R that still fails the criterion (bracket floor)
    pub bracket_lo: f64,
    pub tested: Vec<Estimate>,
}

/// Correlation length xi(l) = inf { R : P[Cross_l(R)] < eps }, estimated by
/// doubling then binary refinement over a shared R ladder. At every tested R
/// all levels reuse the same fields, so the level-coupled monotonicity of
/// crossing probabilities is exact and xi is monotone across levels by
/// construction.
pub fn correlation_length(
    kernel: &Kernel,
    spacing: f64,
    eps: f64,
    levels: &[f64],
    trials: usize,
    seed: u64,
    r_max: f64,
) -> Result<Vec<XiEstimate>> {
    if !(eps > 0.0 && eps < 1.0 / (2.0 * std::f64::consts::E)) {
        return Err(Error::Domain(format!(
            "eps must lie in (0, 1/(2e)), got {eps}"
        )));
    }
    if levels.iter().any(|&l| l >= 0.0) {
        return Err(Error::domain("levels must be negative"));
    }
    let snap = |r: f64| ((r / (4.0 * spacing)).round().max(1.0)) * 4.0 * spacing;
    let mut tested: Vec<(f64, Vec<Estimate>)> = Vec::new();
    let evaluate = |r: f64, tested: &mut Vec<(f64, Vec<Estimate>)>| -> Result<()> {
        if tested.iter().any(|(tr, _)| (tr - r).abs() < 1e-9) {
            return Ok(());
        }
        let kind = EventKind::Cross { r };
        let grid = kind.default_grid(spacing)?;
        let est = mc_estimate_levels(
            kernel,
            &grid,
            &kind,
            levels,
            trials,
            derive_seed(seed, (r / spacing).round() as u64),
        )?;
        tested.push((r, est));
        tested.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(())
    };
    // doubling phase: stop once every level has crossed below eps (or budget)
    let mut r = snap(4.0);
    loop {
        evaluate(r, &mut tested)?;
        let last = &tested.last().unwrap().1;
        let all_below = last.iter().all(|e| e.ci_hi < eps);
        if all_below || 2.0 * r > r_max {
            break;
        }
        r = snap(2.0 * r);
    }
    // refinement: shrink each level's bracket, evaluating every level at
    // each new R to preserve coupling
    for _ in 0..24 {
        let mut inserted = false;
        for j in 0..levels.len() {
            let mut lo = 0.0f64;
            let mut hi = f64::INFINITY;
            for (tr, ests) in &tested {
                if ests[j].ci_hi < eps {
                    hi = hi.min(*tr);
                } else if *tr > lo && *tr < hi {
                    lo = *tr;
                }
            }
            if hi.is_finite() && hi - lo > (4.0 * spacing).max(hi / 8.0) {
                let mid = snap(0.5 * (lo + hi));
                if mid > lo && mid < hi {
                    evaluate(mid, &mut tested)?;
                    inserted = true;
                }
            }
        }
        if !inserted {
            break;
        }
    }
    Ok(levels
        .iter()
        .enumerate()
        .map(|(j, &level)| {
            let mut xi = None;
            let mut bracket_lo = 0.0;
            for (tr, ests) in &tested {
                if ests[j].ci_hi < eps {
                    if xi.is_none() {
                        xi = Some(*tr);
                    }
                } else if xi.is_none() {
                    bracket_lo = *tr;
                }
            }
            XiEstimate {
                level,
                xi,
                bracket_lo,
                tested: tested.iter().map(|(_, e)| e[j].clone()).collect(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference() {
        // 50/100 -> symmetric interval around 0.5
        let (lo, hi) = wilson_interval(50.0, 100, Z95);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        assert!(lo > 0.40 && hi < 0.60);
        let (lo, hi) = wilson_interval(0.0, 100, Z95);
        assert!(lo < 1e-12);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn eps_domain_guard() {
        let k = Kernel::cauchy(0.5, 2).unwrap();
        let err = correlation_length(&k, 0.5, 0.2, &[-0.5], 100, 1, 64.0);
        assert!(err.is_err(), "eps >= 1/(2e) must be rejected");
        let err = correlation_length(&k, 0.5, 0.1, &[0.5], 100, 1, 64.0);
        assert!(err.is_err(), "positive levels must be rejected");
    }
}
