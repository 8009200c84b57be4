//! Estimators of `tau` in `Y = rho + tau f(mu) + eta` for a known transform `f`.
//!
//! `oracle` regresses Y on `E[f(mu) | X, sigma]` under a supplied prior, `npeb`
//! does the same with an NPMLE prior fitted to the data, and `plugin` regresses
//! Y on `f(E[mu | X, sigma])`. Only the first two are consistent in general.

use serde::{Deserialize, Serialize};

use crate::data::ObservationSet;
use crate::error::{Error, Result};
use crate::linear::{GaussianPrior, VARIANCE_FLOOR};
use crate::moments::MomentSummary;
use crate::priors::{
    fit_npmle, posterior_mean_discrete, posterior_mean_gaussian, DiscretePrior, NpmleConfig, Transform,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauEstimator {
    Oracle,
    Npeb,
    Plugin,
}

impl TauEstimator {
    pub fn as_str(&self) -> &'static str {
        match self {
            TauEstimator::Oracle => "oracle",
            TauEstimator::Npeb => "npeb",
            TauEstimator::Plugin => "plugin",
        }
    }
}

impl std::str::FromStr for TauEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(TauEstimator::Oracle),
            "npeb" => Ok(TauEstimator::Npeb),
            "plugin" => Ok(TauEstimator::Plugin),
            other => Err(Error::InvalidInput(format!("unknown tau estimator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Prior {
    Gaussian(GaussianPrior),
    Discrete(DiscretePrior),
}

impl Prior {
    /// `E[f(mu) | x, sigma]`.
    pub fn posterior_mean(&self, f: &Transform, x: f64, sigma: f64) -> Result<f64> {
        match self {
            Prior::Gaussian(g) => Ok(posterior_mean_gaussian(g, f, x, sigma)),
            Prior::Discrete(d) => posterior_mean_discrete(d, f, x, sigma),
        }
    }

    pub fn summary(&self) -> PriorSummary {
        match self {
            Prior::Gaussian(g) => PriorSummary {
                family: "gaussian".into(),
                mean: g.mean,
                variance: g.variance,
                atoms: None,
            },
            Prior::Discrete(d) => PriorSummary {
                family: "discrete".into(),
                mean: d.mean(),
                variance: d.variance(),
                atoms: Some(d.support().len()),
            },
        }
    }
}

/// Compact description of the prior behind an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSummary {
    pub family: String,
    pub mean: f64,
    pub variance: f64,
    pub atoms: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauEstimate {
    pub estimator: TauEstimator,
    pub tau: f64,
    pub rho: f64,
    pub regressor_variance: f64,
    pub prior: PriorSummary,
}

fn ols_on(y: &[f64], r: &[f64], id: TauEstimator, prior: PriorSummary) -> Result<TauEstimate> {
    let zeros = vec![0.0; y.len()];
    let m = MomentSummary::from_slices(y, r, &zeros, None)?;
    let scale = m.var_x + m.mean_x * m.mean_x;
    if !(m.var_x > VARIANCE_FLOOR * scale) {
        return Err(Error::DegenerateRegressor(format!(
            "{} regressor has variance {} (mean {})",
            id.as_str(),
            m.var_x,
            m.mean_x
        )));
    }
    let tau = m.naive_slope();
    if !tau.is_finite() {
        return Err(Error::DegenerateRegressor(format!("{} slope is not finite", id.as_str())));
    }
    Ok(TauEstimate {
        estimator: id,
        tau,
        rho: m.mean_y - tau * m.mean_x,
        regressor_variance: m.var_x,
        prior,
    })
}

/// Per-unit `E[f(mu) | X_i, sigma_i]`.
pub fn posterior_means(data: &ObservationSet, prior: &Prior, f: &Transform) -> Result<Vec<f64>> {
    data.x()
        .iter()
        .zip(data.sigma())
        .map(|(&x, &s)| prior.posterior_mean(f, x, s))
        .collect()
}

/// OLS of Y on posterior means of `f` under the supplied prior.
pub fn oracle_tau(data: &ObservationSet, prior: &Prior, f: &Transform) -> Result<TauEstimate> {
    let r = posterior_means(data, prior, f)?;
    ols_on(data.y(), &r, TauEstimator::Oracle, prior.summary())
}

/// As [`oracle_tau`] with an NPMLE prior fitted to `(X, sigma)`.
pub fn npeb_tau(data: &ObservationSet, f: &Transform, config: &NpmleConfig) -> Result<TauEstimate> {
    let fit = fit_npmle(data, config)?;
    let prior = Prior::Discrete(fit.prior);
    let r = posterior_means(data, &prior, f)?;
    ols_on(data.y(), &r, TauEstimator::Npeb, prior.summary())
}

/// OLS of Y on `f` applied to the posterior mean of `mu`.
pub fn plugin_tau(data: &ObservationSet, prior: &Prior, f: &Transform) -> Result<TauEstimate> {
    let r: Vec<f64> = posterior_means(data, prior, &Transform::Identity)?
        .into_iter()
        .map(|m| f.eval(m))
        .collect();
    ols_on(data.y(), &r, TauEstimator::Plugin, prior.summary())
}
