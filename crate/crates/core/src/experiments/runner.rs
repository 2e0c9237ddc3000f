//! Config-driven experiment pipelines.
//!
//! Every pipeline writes CSV tables plus a `summary.json` into the output
//! directory and is byte-identical across reruns of the same (config, seed).
//! Row-level failures are recorded in the summary with an error string; the
//! run only fails as a whole when nothing succeeded.

use super::config::ExperimentConfig;
use super::fit::{fit_decay_rate, RateModel};
use super::report::{
    estimate_row, fmt_f64, write_csv, write_field_binary, write_json, ESTIMATE_CSV_HEADER,
};
use crate::capacity::{
    c_alpha, capacity, refine_extrapolate, riesz_equilibrium_cdf, CapacityResult,
    DiscretizedDomain, SolveOptions,
};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::percolation::{
    correlation_length, is_estimate, label_mask, largest_diameter, mc_estimate, ComponentLabeling,
    Estimate, EventSpec, IsConfig,
};
use crate::rng::derive_seed;
use crate::sampler::{empirical_covariance, FieldSampler, Grid, GridField, SamplerBudget};
use serde_json::json;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub row_failures: Vec<(String, String)>,
}

/// Execute the configured pipeline into `out_dir`.
pub fn run_config(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(out_dir)?;
    let run = || -> Result<RunSummary> {
        match cfg.experiment.kind.as_str() {
            "capacity" => run_capacity(cfg, out_dir),
            "capacity_table" => run_capacity_table(cfg, out_dir),
            "covariance_validation" => run_covariance(cfg, out_dir),
            "percolate" => run_percolate(cfg, out_dir),
            "decay_rate" => run_decay_rate(cfg, out_dir),
            "correlation_length" => run_correlation_length(cfg, out_dir),
            "diameter" => run_diameter(cfg, out_dir),
            "sample" => run_sample(cfg, out_dir),
            other => Err(Error::Config(format!("unknown kind {other}"))),
        }
    };
    match cfg.experiment.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn solve_opts(tol: f64, max_iter: usize) -> SolveOptions {
    SolveOptions {
        tol,
        max_iter: Some(max_iter),
    }
}

fn capacity_domain(cfg: &ExperimentConfig) -> Result<DiscretizedDomain> {
    let c = &cfg.capacity;
    let max_cell = |len: f64| len / c.cells.max(2) as f64;
    match c.domain.as_str() {
        "segment" => DiscretizedDomain::segment(c.length, max_cell(c.length)),
        "condensed" => {
            DiscretizedDomain::condensed_segment(c.s, c.r, c.big_r, max_cell(c.big_r))
        }
        "ball" => DiscretizedDomain::ball([0.0, 0.0], c.ball_radius, max_cell(c.ball_radius)),
        "union_of_balls" => {
            DiscretizedDomain::union_of_balls(&c.centers, c.ball_radius, max_cell(c.ball_radius))
        }
        "box" => DiscretizedDomain::planar_box(c.length, c.length, max_cell(c.length)),
        other => Err(Error::Config(format!("unknown capacity domain {other:?}"))),
    }
}

fn run_capacity(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    let kernel = cfg.build_kernel()?;
    let domain = capacity_domain(cfg)?;
    let result = capacity(domain, &kernel, &solve_opts(cfg.capacity.tol, cfg.capacity.max_iter))?;
    let measure_csv = out.join("measure.csv");
    let rows: Vec<Vec<String>> = (0..result.n)
        .map(|i| {
            let c = result.measure.domain.center(i);
            vec![
                fmt_f64(c[0]),
                fmt_f64(c[1]),
                fmt_f64(result.measure.weights[i]),
            ]
        })
        .collect();
    write_csv(&measure_csv, "cell_center_x,cell_center_y,weight", &rows)?;
    write_json(
        &out.join("capacity.json"),
        &json!({
            "capacity": result.capacity,
            "gap": result.duality_gap,
            "iterations": result.iterations,
            "n": result.n,
            "converged": result.converged,
            "cell_size": result.cell_size,
            "potential_min": result.potential_min,
            "potential_min_on_support": result.potential_min_on_support,
            "measure_csv_path": "measure.csv",
        }),
    )?;
    Ok(RunSummary {
        out_dir: out.into(),
        files: vec!["capacity.json".into(), "measure.csv".into()],
        row_failures: vec![],
    })
}

fn run_capacity_table(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    let c = &cfg.capacity;
    let alphas = if c.alphas.is_empty() {
        vec![0.3, 0.5, 0.7]
    } else {
        c.alphas.clone()
    };
    let refine = if c.refine.is_empty() {
        vec![c.cells]
    } else {
        c.refine.clone()
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &alpha in &alphas {
        let row = (|| -> Result<Vec<Vec<String>>> {
            let kernel = Kernel::riesz(alpha, cfg.kernel.dim.max(2))?;
            let target = c_alpha(alpha)?;
            let mut per_n = Vec::new();
            let mut out_rows = Vec::new();
            for &n in &refine {
                let domain = DiscretizedDomain::segment(c.length, c.length / n as f64)?;
                let r = capacity(domain, &kernel, &solve_opts(c.tol, c.max_iter))?;
                let ks = equilibrium_ks_distance(&r, alpha)?;
                per_n.push((n, r.capacity));
                out_rows.push(vec![
                    fmt_f64(alpha),
                    n.to_string(),
                    fmt_f64(r.capacity),
                    fmt_f64(target),
                    fmt_f64((r.capacity - target).abs() / target),
                    fmt_f64(r.duality_gap),
                    r.iterations.to_string(),
                    fmt_f64(ks),
                ]);
            }
            if per_n.len() == 3 {
                let extrapolated = refine_extrapolate(&per_n)?;
                out_rows.push(vec![
                    fmt_f64(alpha),
                    "0".into(),
                    fmt_f64(extrapolated),
                    fmt_f64(target),
                    fmt_f64((extrapolated - target).abs() / target),
                    "".into(),
                    "".into(),
                    "".into(),
                ]);
            }
            Ok(out_rows)
        })();
        match row {
            Ok(mut r) => rows.append(&mut r),
            Err(e) => failures.push((format!("alpha={alpha}"), e.to_string())),
        }
    }
    if rows.is_empty() {
        return Err(Error::Numeric("all capacity-table rows failed".into()));
    }
    write_csv(
        &out.join("capacity_table.csv"),
        "alpha,n,capacity,c_alpha,rel_err,gap,iterations,ks_distance",
        &rows,
    )?;
    write_summary(out, cfg, &failures)?;
    Ok(RunSummary {
        out_dir: out.into(),
        files: vec!["capacity_table.csv".into(), "summary.json".into()],
        row_failures: failures,
    })
}

/// Kolmogorov–Smirnov distance of the discrete equilibrium CDF to the
/// Beta((1+a)/2, (1+a)/2) law, evaluated at cell edges (the discrete CDF is
/// piecewise linear, so edges carry the extremes up to O(cell) wiggle).
pub fn equilibrium_ks_distance(result: &CapacityResult, alpha: f64) -> Result<f64> {
    let edges = result.measure.cdf_at_cell_edges()?;
    let length = edges.last().map(|e| e.0).unwrap_or(1.0);
    let mut ks = 0.0f64;
    let mut prev = 0.0f64;
    for &(edge, cum) in &edges {
        let f = riesz_equilibrium_cdf(alpha, edge / length);
        ks = ks.max((cum - f).abs()).max((prev - f).abs());
        prev = cum;
    }
    Ok(ks)
}

fn run_covariance(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    let kernel = cfg.build_kernel()?;
    let cov = &cfg.covariance;
    let grid = Grid::from_extents(
        &[cov.window, cov.window],
        cfg.grid.spacing,
        vec![0.0, 0.0],
    )?;
    let sampler = FieldSampler::new(&kernel, &grid, &SamplerBudget::default())?;
    let seed = cfg.experiment.seed;
    let fields: Vec<GridField> = (0..cov.samples as u64)
        .map(|t| sampler.sample(seed, t))
        .collect();
    let est = empirical_covariance(&fields, &cov.lags)?;
    let mut rows = Vec::new();
    let mut max_abs_z = 0.0f64;
    for e in &est {
        let truth = kernel.eval(e.lag);
        let z = if e.se > 0.0 { (e.mean - truth) / e.se } else { 0.0 };
        max_abs_z = max_abs_z.max(z.abs());
        rows.push(vec![
            fmt_f64(e.lag),
            fmt_f64(truth),
            fmt_f64(e.mean),
            fmt_f64(e.se),
            fmt_f64(z),
        ]);
    }
    write_csv(&out.join("covariance.csv"), "lag,k_true,k_emp,se,z", &rows)?;
    write_json(
        &out.join("summary.json"),
        &json!({
            "kind": "covariance_validation",
            "kernel": kernel.id(),
            "samples": cov.samples,
            "clipped_mass": sampler.clipped_mass,
            "max_abs_z": max_abs_z,
        }),
    )?;
    Ok(RunSummary {
        out_dir: out.into(),
        files: vec!["covariance.csv".into(), "summary.json".into()],
        row_failures: vec![],
    })
}

fn estimate_one(
    cfg: &ExperimentConfig,
    kernel: &Kernel,
    level: f64,
    r: f64,
    seed: u64,
) -> Result<Estimate> {
    let kind = cfg.event_kind_at(r)?;
    let grid = kind.default_grid(cfg.grid.spacing)?;
    let spec = EventSpec { kind, level };
    match cfg.method.name.as_str() {
        "naive" => mc_estimate(kernel, &grid, &spec, cfg.experiment.trials, seed),
        "is" => {
            let is_cfg = IsConfig {
                level_target: cfg.method.level_target,
                shift_domain: None,
                solver: solve_opts(cfg.method.solver_tol, cfg.method.solver_max_iter),
            };
            is_estimate(kernel, &grid, &spec, cfg.experiment.trials, seed, &is_cfg)
                .map(|(e, _)| e)
        }
        other => Err(Error::Config(format!("unknown method {other:?}"))),
    }
}

fn run_percolate(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    let kernel = cfg.build_kernel()?;
    if cfg.event.levels.is_empty() || cfg.event.radii.is_empty() {
        return Err(Error::config("percolate needs event.levels and event.radii"));
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (i, &level) in cfg.event.levels.iter().enumerate() {
        for (j, &r) in cfg.event.radii.iter().enumerate() {
            let seed = derive_seed(cfg.experiment.seed, (i * 1000 + j) as u64);
            match estimate_one(cfg, &kernel, level, r, seed) {
                Ok(e) => rows.push(estimate_row(&kernel, &e)),
                Err(err) => failures.push((format!("level={level},R={r}"), err.to_string())),
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Numeric("all percolate rows failed".into()));
    }
    write_csv(&out.join("estimates.csv"), ESTIMATE_CSV_HEADER, &rows)?;
    write_summary(out, cfg, &failures)?;
    Ok(RunSummary {
        out_dir: out.into(),
        files: vec!["estimates.csv".into(), "summary.json".into()],
        row_failures: failures,
    })
}

fn run_decay_rate(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    let kernel = cfg.build_kernel()?;
    let level = *cfg
        .event
        .levels
        .first()
        .ok_or_else(|| Error::config("decay_rate needs one event level"))?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut estimates = Vec::new();
    for (j, &r) in cfg.event.radii.iter().enumerate() {
        let seed = derive_seed(cfg.experiment.seed, j as u64);
        match estimate_one(cfg, &kernel, level, r, seed) {
            Ok(e) => {
                rows.push(estimate_row(&kernel, &e));
                estimates.push(e);
            }
            Err(err) => failures.push((format!("R={r}"), err.to_string())),
        }
    }
    if estimates.is_empty() {
        return Err(Error::Numeric("all decay-rate rows failed".into()));
    }
    write_csv(&out.join("estimates.csv"), ESTIMATE_CSV_HEADER, &rows)?;
    let model = parse_model(&cfg.fit.model)?;
    let fit = fit_decay_rate(&estimates, model, cfg.fit.drop_smallest);
    let fit_json = match &fit {
        Ok(f) => json!({
            "model": f.model.name(),
            "exponent": f.exponent,
            "exponent_se": f.exponent_se,
            "constant": f.constant,
            "constant_se": f.constant_se,
            "r_range": [f.r_range.0, f.r_range.1],
            "points_used": f.used.len(),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    write_json(&out.join("fit.json"), &fit_json)?;
    write_summary(out, cfg, &failures)?;
    Ok(RunSummary {
        out_dir: out.into(),
        files: vec!["estimates.csv".into(), "fit.json".into(), "summary.json".into()],
        row_failures: failures,
    })
}

pub fn parse_model(name: &str) -> Result<RateModel> {
    match name {
        "power" => Ok(RateModel::Power),
        "power_over_log" => Ok(RateModel::PowerOverLog),
        "log_power" => Ok(RateModel::LogPower),
        other => Err(Error::Config(format!("unknown fit model {other:?}"))),
    }
}

fn run_correlation_length(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    let kernel = cfg.build_kernel()?;
    if cfg.event.levels.is_empty() {
        return Err(Error::config("correlation_length needs event.levels"));
    }
    let xi = correlation_length(
        &kernel,
        cfg.grid.spacing,
        cfg.correlation.eps,
        &cfg.event.levels,
        cfg.experiment.trials,
        cfg.experiment.seed,
        cfg.correlation.r_max,
    )?;
    let mut rows = Vec::new();
    let mut probe_rows = Vec::new();
    for x in &xi {
        rows.push(vec![
            fmt_f64(x.level),
            x.xi.map(fmt_f64).unwrap_or_else(|| "".into()),
            (x.xi.is_none() as u8).to_string(),
            fmt_f64(x.bracket_lo),
        ]);
        for e in &x.tested {
            probe_rows.push(estimate_row(&kernel, e));
        }
    }
    write_csv(&out.join("xi.csv"), "level,xi,censored,bracket_lo", &rows)?;
    write_csv(&out.join("probes.csv"), ESTIMATE_CSV_HEADER, &probe_rows)?;
    write_summary(out, cfg, &[])?;
    Ok(RunSummary {
        out_dir: out.into(),
        files: vec!["xi.csv".into(), "probes.csv".into(), "summary.json".into()],
        row_failures: vec![],
    })
}

/// Per-trial diameters over nested windows: one field per trial on the
/// largest window, largest component diameter inside each B(R).
pub fn diameter_table(
    kernel: &Kernel,
    spacing: f64,
    radii: &[f64],
    level: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<(f64, Vec<f64>)>> {
    use rayon::prelude::*;
    let r_max = radii.iter().cloned().fold(0.0f64, f64::max);
    let snap = |x: f64| (x / spacing).ceil() * spacing;
    let grid = Grid::centered_square(snap(r_max), spacing)?;
    let sampler = FieldSampler::new(kernel, &grid, &SamplerBudget::default())?;
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let field = sampler.sample(seed, t);
            let below: Vec<bool> = field.values.iter().map(|&v| v <= level).collect();
            radii
                .iter()
                .map(|&r| {
                    let mask: Vec<bool> = (0..grid.len())
                        .map(|i| {
                            below[i] && {
                                let c = grid.coord(i);
                                c[0] * c[0] + c[1] * c[1] <= r * r + 1e-9
                            }
                        })
                        .collect();
                    let labels = label_mask(&grid, &mask);
                    let count = labels
                        .iter()
                        .filter(|&&l| l != crate::percolation::NO_LABEL)
                        .map(|&l| l + 1)
                        .max()
                        .unwrap_or(0) as usize;
                    let mut sizes = vec![0usize; count];
                    for &l in &labels {
                        if l != crate::percolation::NO_LABEL {
                            sizes[l as usize] += 1;
                        }
                    }
                    let lab = ComponentLabeling {
                        grid: grid.clone(),
                        level,
                        below: mask,
                        labels,
                        component_count: count,
                        component_sizes: sizes,
                    };
                    largest_diameter(&lab)
                })
                .collect()
        })
        .collect();
    Ok(radii
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let mut ds: Vec<f64> = per_trial.iter().map(|row| row[j]).collect();
            ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (r, ds)
        })
        .collect())
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

fn run_diameter(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    let kernel = cfg.build_kernel()?;
    let level = *cfg
        .event
        .levels
        .first()
        .ok_or_else(|| Error::config("diameter needs one event level"))?;
    if level >= 0.0 {
        return Err(Error::config("diameter levels must be negative"));
    }
    if cfg.diameter.radii.is_empty() {
        return Err(Error::config("diameter needs diameter.radii"));
    }
    let table = diameter_table(
        &kernel,
        cfg.grid.spacing,
        &cfg.diameter.radii,
        level,
        cfg.experiment.trials,
        cfg.experiment.seed,
    )?;
    let alpha = kernel.alpha;
    let mut rows = Vec::new();
    for (r, ds) in &table {
        let med = quantile(ds, 0.5);
        let q25 = quantile(ds, 0.25);
        let q75 = quantile(ds, 0.75);
        let ratio = if alpha > 0.0 {
            med / r.ln().powf(1.0 / alpha)
        } else {
            f64::NAN
        };
        rows.push(vec![
            fmt_f64(*r),
            fmt_f64(level),
            ds.len().to_string(),
            fmt_f64(med),
            fmt_f64(q25),
            fmt_f64(q75),
            fmt_f64(ratio),
        ]);
    }
    write_csv(
        &out.join("diameter.csv"),
        "R,level,trials,d_median,d_q25,d_q75,d_median_over_logR_pow",
        &rows,
    )?;
    write_summary(out, cfg, &[])?;
    Ok(RunSummary {
        out_dir: out.into(),
        files: vec!["diameter.csv".into(), "summary.json".into()],
        row_failures: vec![],
    })
}

fn run_sample(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    let kernel = cfg.build_kernel()?;
    let w = cfg.sample.window;
    let grid = Grid::from_extents(&[w, w], cfg.grid.spacing, vec![0.0, 0.0])?;
    let sampler = FieldSampler::new(&kernel, &grid, &SamplerBudget::default())?;
    let mut files = Vec::new();
    for t in 0..cfg.sample.count as u64 {
        let field = sampler.sample(cfg.experiment.seed, t);
        let name = format!("field_{t:04}.bin");
        write_field_binary(&out.join(&name), &field)?;
        let meta = json!({
            "grid": { "dims": field.grid.dims, "spacing": field.grid.spacing, "origin": field.grid.origin },
            "seed": field.seed,
            "provenance": field.provenance,
        });
        let meta_name = format!("field_{t:04}.meta.json");
        write_json(&out.join(&meta_name), &meta)?;
        files.push(name);
        files.push(meta_name);
    }
    write_summary(out, cfg, &[])?;
    files.push("summary.json".into());
    Ok(RunSummary {
        out_dir: out.into(),
        files,
        row_failures: vec![],
    })
}

fn write_summary(out: &Path, cfg: &ExperimentConfig, failures: &[(String, String)]) -> Result<()> {
    let fail_json: Vec<serde_json::Value> = failures
        .iter()
        .map(|(row, err)| json!({ "row": row, "error": err }))
        .collect();
    write_json(
        &out.join("summary.json"),
        &json!({
            "kind": cfg.experiment.kind,
            "seed": cfg.experiment.seed,
            "trials": cfg.experiment.trials,
            "kernel": { "family": cfg.kernel.family, "alpha": cfg.kernel.alpha, "gamma": cfg.kernel.gamma, "dim": cfg.kernel.dim },
            "row_failures": fail_json,
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_dir(tag: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("gaussperc_runner_{tag}"));
        let _ = std::fs::remove_dir_all(&d);
        std::fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn capacity_pipeline_emits_json_and_csv() {
        let cfg = ExperimentConfig::parse(
            r#"
            [experiment]
            kind = "capacity"
            [kernel]
            family = "riesz"
            alpha = 0.5
            [capacity]
            domain = "segment"
            length = 1.0
            cells = 64
            "#,
        )
        .unwrap();
        let out = tmp_dir("capacity");
        let summary = run_config(&cfg, &out).unwrap();
        assert!(summary.files.contains(&"capacity.json".to_string()));
        let text = std::fs::read_to_string(out.join("capacity.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["capacity"].as_f64().unwrap() > 0.3);
        let csv = std::fs::read_to_string(out.join("measure.csv")).unwrap();
        assert!(csv.starts_with("cell_center_x,cell_center_y,weight\n"));
        assert_eq!(csv.lines().count(), 65);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let cfg = ExperimentConfig::parse(
            r#"
            [experiment]
            kind = "percolate"
            seed = 37
            trials = 120
            [kernel]
            family = "cauchy"
            alpha = 1.0
            [grid]
            spacing = 0.5
            [event]
            kind = "cross"
            levels = [0.0]
            radii = [4.0]
            "#,
        )
        .unwrap();
        let out1 = tmp_dir("idem1");
        let out2 = tmp_dir("idem2");
        run_config(&cfg, &out1).unwrap();
        run_config(&cfg, &out2).unwrap();
        let a = std::fs::read(out1.join("estimates.csv")).unwrap();
        let b = std::fs::read(out2.join("estimates.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_pipeline_round_trips() {
        let cfg = ExperimentConfig::parse(
            r#"
            [experiment]
            kind = "sample"
            seed = 5
            [kernel]
            family = "cauchy"
            alpha = 1.0
            [grid]
            spacing = 0.5
            [sample]
            window = 4.0
            count = 2
            "#,
        )
        .unwrap();
        let out = tmp_dir("sample");
        let s = run_config(&cfg, &out).unwrap();
        assert!(s.files.iter().any(|f| f == "field_0000.bin"));
        let (header, values) =
            crate::experiments::report::read_field_binary(&out.join("field_0001.bin")).unwrap();
        assert_eq!(header["dims"][0], 9);
        assert_eq!(values.len(), 81);
    }
}
