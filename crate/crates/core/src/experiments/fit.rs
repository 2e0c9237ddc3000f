//! Weighted least-squares fits of decay laws to -log p estimates.

use crate::error::{Error, Result};
use crate::percolation::Estimate;
use serde::Serialize;

/// Decay-law model families for -log p as a function of R.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RateModel {
    /// -log p = C R^beta
    Power,
    /// -log p = C R / log R (exponent fixed at 1)
    PowerOverLog,
    /// -log p = C (log R)^gamma
    LogPower,
}

impl RateModel {
    pub fn name(&self) -> &'static str {
        match self {
            RateModel::Power => "power",
            RateModel::PowerOverLog => "power_over_log",
            RateModel::LogPower => "log_power",
        }
    }
}

/// Fitted decay law with standard errors from the weighted normal equations.
#[derive(Clone, Debug, Serialize)]
pub struct RateFit {
    pub model: RateModel,
    pub exponent: f64,
    pub exponent_se: f64,
    pub constant: f64,
    pub constant_se: f64,
    /// standardized residuals per used point
    pub residuals: Vec<f64>,
    /// (R, y = log(-log p), sigma_y) actually used
    pub used: Vec<(f64, f64, f64)>,
    pub r_range: (f64, f64),
}

/// Fit `-log p_hat` against the chosen model in log space, weighting by the
/// delta-method errors `se/p_hat / (-log p_hat)`. Only estimates with
/// `se/p_hat <= 0.3` and `0 < p_hat < 1` are usable; at least 4 usable points
/// are required. `drop_smallest` removes the smallest usable R before
/// fitting (pre-asymptotic bias guard).
pub fn fit_decay_rate(
    estimates: &[Estimate],
    model: RateModel,
    drop_smallest: bool,
) -> Result<RateFit> {
    let mut pts: Vec<(f64, f64, f64)> = estimates
        .iter()
        .filter(|e| e.p_hat > 0.0 && e.p_hat < 1.0 && e.se / e.p_hat <= 0.3)
        .map(|e| {
            let neg_log = -e.p_hat.ln();
            let y = neg_log.ln();
            let sigma = (e.se / e.p_hat) / neg_log;
            (e.scale, y, sigma)
        })
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if pts.len() < 4 {
        return Err(Error::Fit(format!(
            "need >= 4 usable (R, p) points, have {}",
            pts.len()
        )));
    }
    if drop_smallest {
        pts.remove(0);
    }
    fit_points(&pts, model)
}

/// Fit pre-assembled (R, y, sigma) triples.
pub fn fit_points(pts: &[(f64, f64, f64)], model: RateModel) -> Result<RateFit> {
    if pts.len() < 2 {
        return Err(Error::Fit("need >= 2 points".into()));
    }
    let design: Vec<(f64, f64)> = pts
        .iter()
        .map(|&(r, y, _)| match model {
            RateModel::Power => (r.ln(), y),
            RateModel::PowerOverLog => (0.0, y - (r / r.ln()).ln()),
            RateModel::LogPower => (r.ln().ln(), y),
        })
        .collect();
    let w: Vec<f64> = pts
        .iter()
        .map(|&(_, _, s)| 1.0 / (s * s).max(1e-300))
        .collect();
    let (intercept, slope, int_se, slope_se) = match model {
        RateModel::PowerOverLog => {
            let sw: f64 = w.iter().sum();
            let mean = design
                .iter()
                .zip(&w)
                .map(|(&(_, y), &wi)| wi * y)
                .sum::<f64>()
                / sw;
            (mean, 1.0, (1.0 / sw).sqrt(), 0.0)
        }
        _ => {
            let sw: f64 = w.iter().sum();
            let sx: f64 = design.iter().zip(&w).map(|(&(x, _), &wi)| wi * x).sum();
            let sy: f64 = design.iter().zip(&w).map(|(&(_, y), &wi)| wi * y).sum();
            let sxx: f64 = design
                .iter()
                .zip(&w)
                .map(|(&(x, _), &wi)| wi * x * x)
                .sum();
            let sxy: f64 = design
                .iter()
                .zip(&w)
                .map(|(&(x, y), &wi)| wi * x * y)
                .sum();
            let det = sw * sxx - sx * sx;
            if det <= 0.0 {
                return Err(Error::Fit("degenerate design (identical R values)".into()));
            }
            let slope = (sw * sxy - sx * sy) / det;
            let intercept = (sxx * sy - sx * sxy) / det;
            (intercept, slope, (sxx / det).sqrt(), (sw / det).sqrt())
        }
    };
    let residuals: Vec<f64> = design
        .iter()
        .zip(pts)
        .map(|(&(x, y), &(_, _, s))| (y - intercept - slope * x) / s)
        .collect();
    let constant = intercept.exp();
    Ok(RateFit {
        model,
        exponent: slope,
        exponent_se: slope_se,
        constant,
        constant_se: constant * int_se,
        residuals,
        used: pts.to_vec(),
        r_range: (pts[0].0, pts[pts.len() - 1].0),
    })
}
