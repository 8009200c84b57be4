//! Regression with a noisily measured latent regressor.
//!
//! Each unit carries an outcome `y`, a noisy estimate `x` of a latent `mu`
//! and the standard error `sigma` of that estimate. The crate estimates the
//! slope of `y` on `mu` when `sigma` varies across units:
//!
//! - [`linear`]: the classical errors-in-variables correction, regression on
//!   Gaussian shrinkage, weighted and two-sided variants, and leave-one-out
//!   estimators on student-level data.
//! - [`nonlinear`]: slopes on `E[f(mu) | x, sigma]` under a Gaussian or
//!   NPMLE ([`priors::fit_npmle`]) prior.
//! - [`inference`]: bootstrap intervals and diagnostics for dependence
//!   between `sigma` and the latent distribution.
//! - [`simulation`]: calibrated designs and seeded Monte Carlo grids.
//!
//! ```
//! use latentreg::{classical_eiv, sample_moments, ObservationSet};
//!
//! let x = vec![0.1, 0.4, -0.3, 0.8, -0.5, 0.2];
//! let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
//! let data = ObservationSet::new(y, x, vec![0.1; 6]).unwrap();
//! let m = sample_moments(&data);
//! let est = classical_eiv(&m).unwrap();
//! // the naive slope is 2; the correction removes noise variance 0.01
//! assert!((est.beta - 2.0 * m.var_x / (m.var_x - 0.01)).abs() < 1e-12);
//! ```

pub mod cli;
pub mod data;
pub mod error;
pub mod inference;
mod linalg;
pub mod linear;
pub mod moments;
pub mod nonlinear;
pub mod priors;
pub mod simulation;
pub mod smooth;
pub mod streams;

pub use data::{aggregate, load_grouped, load_observations, Covariates, Group, GroupedData, ObservationSet, Schema};
pub use error::{Error, Result};
pub use inference::{bootstrap, diagnose_precision, BootstrapConfig, BootstrapResult, DiagnosticConfig, DiagnosticReport};
pub use linear::{
    classical_eiv, debiased_moment, loo_iv, shrinkage_estimate, two_sided_corrected, weighted_classical_eiv,
    GaussianPrior, LinearEstimate, LinearEstimator, PriorMoments,
};
pub use moments::{partial_out, sample_moments, weighted_moments, MomentSummary};
pub use nonlinear::{npeb_tau, oracle_tau, plugin_tau, Prior, TauEstimate, TauEstimator};
pub use priors::{fit_npmle, DiscretePrior, NpmleConfig, NpmleFit, Transform};
pub use simulation::{run_monte_carlo, DgpSpec, McConfig, McSummary};
pub use smooth::{Bandwidth, PiecewiseLinear};
