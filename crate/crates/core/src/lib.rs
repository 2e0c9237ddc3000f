//! Generalized capacities, Gaussian field synthesis, and excursion-set
//! percolation estimation for isotropic kernels with regularly varying decay.
//!
//! Modules:
//! * [`kernels`] — covariance families, scale mixtures, convolution roots,
//!   Tauberian constants.
//! * [`capacity`] — energies, equilibrium measures and capacities on
//!   discretized compact domains, with duality certificates.
//! * [`sampler`] — stationary field synthesis on grids, local/global
//!   decompositions, Cameron–Martin tilting.
//! * [`percolation`] — excursion-set labeling, connection events,
//!   (importance-sampled) Monte Carlo estimates.
//! * [`experiments`] — config-driven experiment runner, rate fits, reports.

pub mod error;
pub mod quad;
pub mod rng;
pub mod special;
pub mod sum;

pub mod capacity;
pub mod experiments;
pub mod kernels;
pub mod percolation;
pub mod sampler;

pub use error::{Error, Result};
pub use kernels::{Kernel, KernelFamily, MovingAverageKernel, ScaleMixture};
