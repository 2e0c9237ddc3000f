//! Experiment configuration: a flat key-value TOML file with sections.
//!
//! Grammar (TOML; unknown keys are rejected):
//!
//! ```text
//! [experiment]
//! kind = "capacity" | "capacity_table" | "covariance_validation" |
//!        "percolate" | "decay_rate" | "correlation_length" |
//!        "diameter" | "sample"
//! seed = 42               # u64, default 0
//! trials = 1000           # per estimate, default 1000
//! threads = 2             # optional worker-pool size
//!
//! [kernel]
//! family = "cauchy" | "riesz" | "log"
//! alpha = 0.5             # cauchy/riesz index
//! gamma = 1.0             # log family exponent
//! dim = 2
//! join_radius = 2.0       # log family cap radius, >= 2
//!
//! [grid]
//! spacing = 0.25
//!
//! [event]                 # percolate / decay_rate
//! kind = "arm" | "cross" | "ann" | "tube" | "ann_inf"
//! r_in = 0.0              # arm inner radius
//! rho = 0.25              # tube aspect exponent
//! levels = [-1.0]
//! radii = [16.0, 32.0]
//!
//! [method]
//! name = "naive" | "is"
//! level_target = 0.0      # tilt target (is)
//! solver_tol = 1e-6
//! solver_max_iter = 4000000
//!
//! [fit]                   # decay_rate
//! model = "power" | "power_over_log" | "log_power"
//! drop_smallest = true
//!
//! [capacity]              # capacity / capacity_table
//! domain = "segment" | "condensed" | "ball" | "union_of_balls" | "box"
//! length = 1.0            # segment length / box side
//! cells = 512             # target cell count along the length
//! alphas = [0.3, 0.5, 0.7]        # capacity_table sweep (riesz)
//! refine = [128, 256, 512]        # capacity_table cell counts
//! s = 9.19  r = 27.86  big_r = 256.0   # condensed segment
//! ball_radius = 4.0
//! centers = [[0.0, 0.0], [32.0, 0.0]]
//! tol = 1e-6
//! max_iter = 4000000
//!
//! [covariance]            # covariance_validation
//! lags = [0.0, 1.0, 2.0, 4.0, 8.0]
//! samples = 10000
//! window = 32.0
//!
//! [correlation]           # correlation_length
//! eps = 0.1
//! r_max = 256.0
//!
//! [diameter]
//! radii = [64.0, 128.0, 256.0]
//!
//! [sample]
//! window = 32.0
//! count = 1
//! ```
//!
//! Environment variables are never consulted.

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub kernel: KernelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub event: EventSection,
    #[serde(default)]
    pub method: MethodSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub capacity: CapacitySection,
    #[serde(default)]
    pub covariance: CovarianceSection,
    #[serde(default)]
    pub correlation: CorrelationSection,
    #[serde(default)]
    pub diameter: DiameterSection,
    #[serde(default)]
    pub sample: SampleSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_trials() -> usize {
    1000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub family: String,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_join_radius")]
    pub join_radius: f64,
}

fn default_dim() -> usize {
    2
}
fn default_join_radius() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_spacing")]
    pub spacing: f64,
}

fn default_spacing() -> f64 {
    0.25
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            spacing: default_spacing(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EventSection {
    #[serde(default = "default_event_kind")]
    pub kind: String,
    #[serde(default)]
    pub r_in: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub radii: Vec<f64>,
}

fn default_event_kind() -> String {
    "arm".into()
}
fn default_rho() -> f64 {
    0.25
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    #[serde(default = "default_method")]
    pub name: String,
    #[serde(default)]
    pub level_target: f64,
    #[serde(default = "default_tol")]
    pub solver_tol: f64,
    #[serde(default = "default_max_iter")]
    pub solver_max_iter: usize,
}

fn default_method() -> String {
    "naive".into()
}
fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    4_000_000
}

impl Default for MethodSection {
    fn default() -> Self {
        MethodSection {
            name: default_method(),
            level_target: 0.0,
            solver_tol: default_tol(),
            solver_max_iter: default_max_iter(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_true")]
    pub drop_smallest: bool,
}

fn default_model() -> String {
    "power".into()
}
fn default_true() -> bool {
    true
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection {
            model: default_model(),
            drop_smallest: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitySection {
    #[serde(default = "default_domain")]
    pub domain: String,
    #[serde(default = "default_one")]
    pub length: f64,
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub refine: Vec<usize>,
    #[serde(default)]
    pub s: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub big_r: f64,
    #[serde(default)]
    pub ball_radius: f64,
    #[serde(default)]
    pub centers: Vec<[f64; 2]>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_domain() -> String {
    "segment".into()
}
fn default_one() -> f64 {
    1.0
}
fn default_cells() -> usize {
    512
}

impl Default for CapacitySection {
    fn default() -> Self {
        CapacitySection {
            domain: default_domain(),
            length: 1.0,
            cells: default_cells(),
            alphas: Vec::new(),
            refine: Vec::new(),
            s: 0.0,
            r: 0.0,
            big_r: 0.0,
            ball_radius: 0.0,
            centers: Vec::new(),
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceSection {
    #[serde(default)]
    pub lags: Vec<f64>,
    #[serde(default = "default_cov_samples")]
    pub samples: usize,
    #[serde(default = "default_window")]
    pub window: f64,
}

fn default_cov_samples() -> usize {
    10_000
}
fn default_window() -> f64 {
    32.0
}

impl Default for CovarianceSection {
    fn default() -> Self {
        CovarianceSection {
            lags: vec![0.0, 1.0, 2.0, 4.0, 8.0],
            samples: default_cov_samples(),
            window: default_window(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSection {
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
}

fn default_eps() -> f64 {
    0.1
}
fn default_r_max() -> f64 {
    256.0
}

impl Default for CorrelationSection {
    fn default() -> Self {
        CorrelationSection {
            eps: default_eps(),
            r_max: default_r_max(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DiameterSection {
    #[serde(default)]
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_count() -> usize {
    1
}

impl Default for SampleSection {
    fn default() -> Self {
        SampleSection {
            window: default_window(),
            count: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {path:?}: {e}")))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        const KINDS: [&str; 8] = [
            "capacity",
            "capacity_table",
            "covariance_validation",
            "percolate",
            "decay_rate",
            "correlation_length",
            "diameter",
            "sample",
        ];
        if !KINDS.contains(&self.experiment.kind.as_str()) {
            return Err(Error::Config(format!(
                "unknown experiment kind {:?} (expected one of {KINDS:?})",
                self.experiment.kind
            )));
        }
        if !(self.grid.spacing > 0.0) {
            return Err(Error::config("grid spacing must be positive"));
        }
        // decay_rate needs a strictly increasing schedule
        if self.experiment.kind == "decay_rate" || self.experiment.kind == "diameter" {
            let radii = if self.experiment.kind == "decay_rate" {
                &self.event.radii
            } else {
                &self.diameter.radii
            };
            if radii.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::config("R schedule must be strictly increasing"));
            }
        }
        Ok(())
    }

    /// Build the configured kernel.
    pub fn build_kernel(&self) -> Result<Kernel> {
        let k = &self.kernel;
        match k.family.as_str() {
            "cauchy" => Kernel::cauchy(k.alpha, k.dim),
            "riesz" => Kernel::riesz(k.alpha, k.dim),
            "log" => Kernel::log_correlated(k.gamma, k.dim, k.join_radius),
            other => Err(Error::Config(format!("unknown kernel family {other:?}"))),
        }
        .map_err(|e| Error::Config(format!("kernel: {e}")))
    }

    pub fn event_kind(&self) -> Result<crate::percolation::EventKind> {
        use crate::percolation::EventKind;
        let radius = |r: f64| -> Result<f64> {
            if r > 0.0 {
                Ok(r)
            } else {
                Err(Error::config("event radius must be positive"))
            }
        };
        // a single kind template; the actual radius comes from the schedule
        let r0 = self.event.radii.first().copied().unwrap_or(0.0);
        match self.event.kind.as_str() {
            "arm" => Ok(EventKind::Arm {
                r_in: self.event.r_in,
                r_out: radius(r0)?,
            }),
            "cross" => Ok(EventKind::Cross { r: radius(r0)? }),
            "ann" => Ok(EventKind::Ann { r: radius(r0)? }),
            "tube" => Ok(EventKind::Tube {
                r: radius(r0)?,
                rho: self.event.rho,
            }),
            "ann_inf" => Ok(EventKind::AnnInf { r: radius(r0)? }),
            other => Err(Error::Config(format!("unknown event kind {other:?}"))),
        }
    }

    /// Instantiate the event kind at radius `r`.
    pub fn event_kind_at(&self, r: f64) -> Result<crate::percolation::EventKind> {
        use crate::percolation::EventKind;
        match self.event.kind.as_str() {
            "arm" => Ok(EventKind::Arm {
                r_in: self.event.r_in,
                r_out: r,
            }),
            "cross" => Ok(EventKind::Cross { r }),
            "ann" => Ok(EventKind::Ann { r }),
            "tube" => Ok(EventKind::Tube {
                r,
                rho: self.event.rho,
            }),
            "ann_inf" => Ok(EventKind::AnnInf { r }),
            other => Err(Error::Config(format!("unknown event kind {other:?}"))),
        }
    }
}
