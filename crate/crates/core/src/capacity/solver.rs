//! Gram assembly and the conditional-gradient (Frank–Wolfe) simplex solver.

use super::domain::{Cells, DiscretizedDomain};
use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelFamily};
use crate::quad::integrate;
use crate::sum::kahan_sum;
use rayon::prelude::*;

/// Distance density of two uniform points in the unit square.
fn square_distance_density(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t <= 1.0 {
        2.0 * t * (t * t - 4.0 * t + std::f64::consts::PI)
    } else if t * t <= 2.0 {
        let s = (t * t - 1.0).sqrt();
        2.0 * t
            * (4.0 * s - (t * t + 2.0 - std::f64::consts::PI)
                - 4.0 * (s / 1.0).atan())
    } else {
        0.0
    }
}

/// Self-energy of the uniform density on a unit square under r^-alpha.
pub(crate) fn square_self_energy(alpha: f64) -> Result<f64> {
    if alpha >= 2.0 {
        return Err(Error::Singularity(
            "square cells have infinite self-energy for alpha >= 2".into(),
        ));
    }
    let v = integrate(
        |t| square_distance_density(t) * t.powf(-alpha),
        0.0,
        std::f64::consts::SQRT_2,
        1e-11,
        1e-300,
    )?;
    Ok(v.value)
}

/// Antiderivative pair for the exact 1-D cell average of r^-alpha:
/// G''(u) = |u|^-alpha.
fn g2(u: f64, alpha: f64) -> f64 {
    u.abs().powf(2.0 - alpha) / ((1.0 - alpha) * (2.0 - alpha))
}

/// Cell-averaged kernel value between cells `i` and `j`.
///
/// Power kernels on 1-D cells use the exact double integral; smooth bounded
/// kernels use the midpoint value with K(0) on the diagonal.
pub(crate) fn averaged_entry(
    domain: &DiscretizedDomain,
    kernel: &Kernel,
    square_self: Option<f64>,
    i: usize,
    j: usize,
) -> Result<f64> {
    let riesz = kernel.family == KernelFamily::Riesz;
    match &domain.cells {
        Cells::OneD { intervals } => {
            let (a1, b1) = intervals[i];
            let (a2, b2) = intervals[j];
            let h1 = b1 - a1;
            let h2 = b2 - a2;
            if riesz {
                if kernel.alpha >= 1.0 {
                    return Err(Error::Singularity(
                        "1-D cells have infinite self-energy for riesz alpha >= 1".into(),
                    ));
                }
                if h1 == 0.0 || h2 == 0.0 {
                    if i == j {
                        return Err(Error::Singularity(
                            "singular kernel with point atoms (zero-size cells)".into(),
                        ));
                    }
                    let d = (0.5 * (a2 + b2) - 0.5 * (a1 + b1)).abs();
                    return kernel.try_eval(d);
                }
                let a = kernel.alpha;
                let v = g2(b2 - a1, a) - g2(a2 - a1, a) - g2(b2 - b1, a) + g2(a2 - b1, a);
                Ok(v / (h1 * h2))
            } else if i == j {
                kernel
                    .k0
                    .ok_or_else(|| Error::Singularity("kernel lacks finite K(0)".into()))
            } else {
                Ok(kernel.eval((0.5 * (a2 + b2) - 0.5 * (a1 + b1)).abs()))
            }
        }
        Cells::TwoD { centers, side } => {
            if i == j {
                if riesz {
                    Ok(side.powf(-kernel.alpha)
                        * square_self.expect("square self-energy precomputed"))
                } else {
                    kernel
                        .k0
                        .ok_or_else(|| Error::Singularity("kernel lacks finite K(0)".into()))
                }
            } else {
                let dx = centers[i][0] - centers[j][0];
                let dy = centers[i][1] - centers[j][1];
                kernel.try_eval((dx * dx + dy * dy).sqrt())
            }
        }
    }
}

/// Dense cell-averaged Gram matrix, row-major.
pub(crate) fn build_gram(domain: &DiscretizedDomain, kernel: &Kernel) -> Result<Vec<f64>> {
    let n = domain.len();
    let square_self = match (&domain.cells, kernel.family) {
        (Cells::TwoD { .. }, KernelFamily::Riesz) => Some(square_self_energy(kernel.alpha)?),
        _ => None,
    };
    // validate the diagonal once up front so errors surface deterministically
    averaged_entry(domain, kernel, square_self, 0, 0)?;
    let mut gram = vec![0.0; n * n];
    gram.par_chunks_mut(n).enumerate().try_for_each(
        |(i, row): (usize, &mut [f64])| -> Result<()> {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = averaged_entry(domain, kernel, square_self, i, j)?;
            }
            Ok(())
        },
    )?;
    Ok(gram)
}

pub struct SolveOptions {
    /// Relative Frank–Wolfe gap at which to stop.
    pub tol: f64,
    /// Iteration cap; `None` means 200 * n.
    pub max_iter: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-6,
            max_iter: None,
        }
    }
}

pub(crate) struct FwSolution {
    pub weights: Vec<f64>,
    pub energy: f64,
    pub gap_rel: f64,
    pub iterations: usize,
    pub converged: bool,
    pub half_gradient: Vec<f64>, // (G w)_i at the final iterate
}

/// Minimize w^T G w over the probability simplex by conditional gradient with
/// exact line search and away steps. Both oracles are single scans over
/// gradient coordinates (argmin over all cells for the forward vertex,
/// argmax over the support for the away vertex) with lowest-index
/// tie-breaking; iterates start uniform. Away steps keep the iterate from
/// zig-zagging when the equilibrium measure sits on a face of the simplex,
/// which plain forward steps resolve only at a sublinear rate.
pub(crate) fn frank_wolfe(gram: &[f64], n: usize, opts: &SolveOptions) -> Result<FwSolution> {
    if n == 0 {
        return Err(Error::domain("empty domain"));
    }
    let max_iter = opts.max_iter.unwrap_or(200 * n);
    let mut w = vec![1.0 / n as f64; n];
    let mut g: Vec<f64> = (0..n)
        .map(|i| kahan_sum((0..n).map(|j| gram[i * n + j] * w[j])))
        .collect();
    let mut energy = kahan_sum((0..n).map(|i| w[i] * g[i]));
    let mut gap_rel;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // periodic refresh against incremental drift
        if iterations > 0 && iterations % 1024 == 0 {
            for i in 0..n {
                g[i] = kahan_sum((0..n).map(|j| gram[i * n + j] * w[j]));
            }
            energy = kahan_sum((0..n).map(|i| w[i] * g[i]));
        }
        let mut fw = 0usize;
        for i in 1..n {
            if g[i] < g[fw] {
                fw = i;
            }
        }
        let gap = 2.0 * (energy - g[fw]);
        gap_rel = gap / energy;
        if gap_rel <= opts.tol {
            converged = true;
            break;
        }
        // away vertex: largest gradient over the support
        let mut aw = usize::MAX;
        for i in 0..n {
            if w[i] > 0.0 && (aw == usize::MAX || g[i] > g[aw]) {
                aw = i;
            }
        }
        let fw_score = energy - g[fw];
        let aw_score = if aw != usize::MAX { g[aw] - energy } else { f64::NEG_INFINITY };
        if fw_score >= aw_score || w[aw] >= 1.0 {
            // forward step toward e_fw
            let denom = gram[fw * n + fw] - 2.0 * g[fw] + energy;
            let t = if denom > 0.0 {
                (fw_score / denom).clamp(0.0, 1.0)
            } else {
                1.0
            };
            if t == 0.0 {
                break;
            }
            let g_fw_old = g[fw];
            let omt = 1.0 - t;
            for x in w.iter_mut() {
                *x *= omt;
            }
            w[fw] += t;
            let row = &gram[fw * n..(fw + 1) * n];
            for i in 0..n {
                g[i] = omt * g[i] + t * row[i];
            }
            energy =
                omt * omt * energy + 2.0 * t * omt * g_fw_old + t * t * gram[fw * n + fw];
        } else {
            // away step from e_aw: w <- (1 + t) w - t e_aw
            let t_max = w[aw] / (1.0 - w[aw]);
            let denom = energy - 2.0 * g[aw] + gram[aw * n + aw];
            let t = if denom > 0.0 {
                (aw_score / denom).clamp(0.0, t_max)
            } else {
                t_max
            };
            if t == 0.0 {
                break;
            }
            let g_aw_old = g[aw];
            let opt = 1.0 + t;
            for x in w.iter_mut() {
                *x *= opt;
            }
            w[aw] -= t;
            if t == t_max {
                w[aw] = 0.0; // drop step: atom leaves the support exactly
            }
            let row = &gram[aw * n..(aw + 1) * n];
            for i in 0..n {
                g[i] = opt * g[i] - t * row[i];
            }
            energy =
                opt * opt * energy - 2.0 * t * opt * g_aw_old + t * t * gram[aw * n + aw];
        }
        iterations += 1;
    }
    // exact recompute at the final iterate
    let total = kahan_sum(w.iter().copied());
    for x in w.iter_mut() {
        *x /= total;
    }
    for i in 0..n {
        g[i] = kahan_sum((0..n).map(|j| gram[i * n + j] * w[j]));
    }
    energy = kahan_sum((0..n).map(|i| w[i] * g[i]));
    let g_min = g.iter().copied().fold(f64::INFINITY, f64::min);
    gap_rel = (2.0 * (energy - g_min) / energy).max(0.0);
    if gap_rel <= opts.tol {
        converged = true;
    }
    Ok(FwSolution {
        weights: w,
        energy,
        gap_rel,
        iterations,
        converged,
        half_gradient: g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_distance_density_normalizes() {
        let total = integrate(square_distance_density, 0.0, std::f64::consts::SQRT_2, 1e-12, 0.0)
            .unwrap()
            .value;
        assert!((total - 1.0).abs() < 1e-9, "density mass {total}");
        let mean = integrate(
            |t| t * square_distance_density(t),
            0.0,
            std::f64::consts::SQRT_2,
            1e-12,
            0.0,
        )
        .unwrap()
        .value;
        // square line-picking constant (2 + sqrt(2) + 5 asinh(1)) / 15
        let expect = (2.0 + std::f64::consts::SQRT_2 + 5.0 * 1.0f64.asinh()) / 15.0;
        assert!((mean - expect).abs() < 1e-9, "mean {mean} vs {expect}");
    }

    #[test]
    fn fw_solves_tiny_quadratic() {
        // G = diag(1, 2) -> minimizer w = (2/3, 1/3), energy 2/3
        let gram = vec![1.0, 0.0, 0.0, 2.0];
        let sol = frank_wolfe(
            &gram,
            2,
            &SolveOptions {
                tol: 1e-10,
                max_iter: Some(10_000),
            },
        )
        .unwrap();
        assert!(sol.converged);
        assert!((sol.weights[0] - 2.0 / 3.0).abs() < 1e-5);
        assert!((sol.energy - 2.0 / 3.0).abs() < 1e-10);
    }
}
