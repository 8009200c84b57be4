//! Simulation designs calibrated to `(X, sigma)` data and a Monte Carlo engine
//! comparing estimators across a grid of designs.
//!
//! A [`DgpSpec`] fixes the distribution of sigma, the conditional mean
//! `m(sigma)` and variance `s^2(sigma)` of the latent attribute, and an
//! outcome equation. In linear mode
//!
//! ```text
//! Y = beta_mu mu + beta_sigma log10(sigma) + noise_sd u
//! ```
//!
//! with `mu | sigma ~ N(m(sigma), s^2(sigma))`, and the target is the
//! population projection coefficient of Y on mu. In nonlinear mode mu is drawn
//! from `G = N(m_bar, s_bar^2)`, the unconditional normal matching the first two
//! moments of mu, and `Y = tau 1(mu > mu0) + noise_sd u` with `mu0` a quantile
//! of G.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{LatentTruth, ObservationSet};
use crate::error::{Error, Result};
use crate::linear::{classical_eiv, naive_ols, shrinkage_estimate, GaussianPrior, PriorMoments};
use crate::moments::sample_moments;
use crate::nonlinear::{npeb_tau, oracle_tau, plugin_tau, Prior};
use crate::priors::{normal_expectation, std_normal_quantile, NpmleConfig, Transform};
use crate::smooth::{local_linear_fit, Bandwidth, PiecewiseLinear};
use crate::streams::{cell_stream, par_map, stream_rng};

pub const DEFAULT_N: usize = 10058;

/// Where sigma comes from: resampling stored values, or `log10 sigma ~ N(mean, sd^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSource {
    Empirical { values: Vec<f64> },
    LogNormal { log10_mean: f64, log10_sd: f64 },
}

impl SigmaSource {
    /// Population mean of `h(sigma)`.
    pub fn expect(&self, h: impl Fn(f64) -> f64) -> f64 {
        match self {
            SigmaSource::Empirical { values } => values.iter().map(|&s| h(s)).sum::<f64>() / values.len() as f64,
            SigmaSource::LogNormal { log10_mean, log10_sd } => {
                normal_expectation(*log10_mean, log10_sd * log10_sd, |l| h(10f64.powf(l)))
            }
        }
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            SigmaSource::Empirical { values } => values[rng.gen_range(0..values.len())],
            SigmaSource::LogNormal { log10_mean, log10_sd } => {
                let z: f64 = StandardNormal.sample(rng);
                10f64.powf(log10_mean + log10_sd * z)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectScale {
    /// `effect = sd(1(mu > mu0)) * tau`.
    #[default]
    Normalized,
    /// `effect = tau`.
    Raw,
}

fn unit_noise() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DgpMode {
    Linear {
        beta_mu: f64,
        beta_sigma: f64,
        #[serde(default = "unit_noise")]
        noise_sd: f64,
    },
    Nonlinear {
        effect: f64,
        #[serde(default)]
        effect_scale: EffectScale,
        quantile: f64,
        #[serde(default = "unit_noise")]
        noise_sd: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationInfo {
    /// Share of the evaluation grid where `s^2` was clamped at zero.
    pub clamped_fraction: f64,
    pub bandwidth: Bandwidth,
}

fn default_n() -> usize {
    DEFAULT_N
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub sigma_source: SigmaSource,
    pub cond_mean: PiecewiseLinear,
    pub cond_var: PiecewiseLinear,
    /// `None` after calibration, before outcome coefficients are chosen.
    #[serde(default)]
    pub mode: Option<DgpMode>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationInfo>,
}

fn spec_err(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Spec {
        pointer: pointer.into(),
        message: message.into(),
    }
}

/// Population moments implied by a spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub mean_mu: f64,
    pub var_mu: f64,
    pub mean_log_sigma: f64,
    pub var_log_sigma: f64,
    pub cov_mu_log_sigma: f64,
}

/// The latent distribution and threshold of a nonlinear design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearTruth {
    pub prior: GaussianPrior,
    pub threshold: f64,
    pub tau: f64,
}

impl DgpSpec {
    pub fn new(sigma_source: SigmaSource, cond_mean: PiecewiseLinear, cond_var: PiecewiseLinear) -> Self {
        DgpSpec {
            sigma_source,
            cond_mean,
            cond_var,
            mode: None,
            n: DEFAULT_N,
            seed: 0,
            calibration: None,
        }
    }

    pub fn with_mode(mut self, mode: DgpMode) -> Self {
        self.mode = Some(mode);
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// Checks every invariant, naming the offending field by JSON pointer.
    pub fn validate(&self) -> Result<()> {
        match &self.sigma_source {
            SigmaSource::Empirical { values } => {
                if values.is_empty() {
                    return Err(spec_err("/sigma_source/empirical/values", "empty sigma sample"));
                }
                if let Some(i) = values.iter().position(|s| !(*s > 0.0) || !s.is_finite()) {
                    return Err(spec_err(
                        format!("/sigma_source/empirical/values/{i}"),
                        format!("sigma must be finite and positive, got {}", values[i]),
                    ));
                }
            }
            SigmaSource::LogNormal { log10_mean, log10_sd } => {
                if !log10_mean.is_finite() {
                    return Err(spec_err("/sigma_source/log_normal/log10_mean", "must be finite"));
                }
                if !(*log10_sd >= 0.0) || !log10_sd.is_finite() {
                    return Err(spec_err("/sigma_source/log_normal/log10_sd", "must be finite and nonnegative"));
                }
            }
        }
        for (name, f) in [("cond_mean", &self.cond_mean), ("cond_var", &self.cond_var)] {
            PiecewiseLinear::new(f.knots().to_vec(), f.values().to_vec())
                .map_err(|e| spec_err(format!("/{name}"), e.to_string()))?;
        }
        if let Some(i) = self.cond_var.values().iter().position(|v| *v < 0.0) {
            return Err(spec_err(
                format!("/cond_var/y/{i}"),
                format!("conditional variance must be nonnegative, got {}", self.cond_var.values()[i]),
            ));
        }
        match self.mode {
            Some(DgpMode::Linear {
                beta_mu,
                beta_sigma,
                noise_sd,
            }) => {
                if !beta_mu.is_finite() {
                    return Err(spec_err("/mode/linear/beta_mu", "must be finite"));
                }
                if !beta_sigma.is_finite() {
                    return Err(spec_err("/mode/linear/beta_sigma", "must be finite"));
                }
                if !(noise_sd > 0.0) || !noise_sd.is_finite() {
                    return Err(spec_err("/mode/linear/noise_sd", "must be finite and positive"));
                }
            }
            Some(DgpMode::Nonlinear {
                effect,
                quantile,
                noise_sd,
                ..
            }) => {
                if !effect.is_finite() {
                    return Err(spec_err("/mode/nonlinear/effect", "must be finite"));
                }
                if !(quantile > 0.0 && quantile < 1.0) {
                    return Err(spec_err("/mode/nonlinear/quantile", format!("must lie in (0, 1), got {quantile}")));
                }
                if !(noise_sd > 0.0) || !noise_sd.is_finite() {
                    return Err(spec_err("/mode/nonlinear/noise_sd", "must be finite and positive"));
                }
            }
            None => {}
        }
        if self.n < crate::data::MIN_UNITS {
            return Err(spec_err("/n", format!("sample size must be at least {}", crate::data::MIN_UNITS)));
        }
        let pop = self.population();
        if !(pop.var_mu > 0.0) {
            return Err(spec_err("/cond_var", "latent attribute has zero variance"));
        }
        Ok(())
    }

    /// Parses and validates a JSON spec; errors carry the JSON pointer of the bad field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: DgpSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = json_pointer(e.path());
            spec_err(pointer, e.into_inner().to_string())
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_json() + "\n").map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn population(&self) -> Population {
        let src = &self.sigma_source;
        let m = |s: f64| self.cond_mean.eval(s);
        let mean_m = src.expect(m);
        let mean_l = src.expect(f64::log10);
        let var_m = src.expect(|s| (m(s) - mean_m).powi(2));
        let var_l = src.expect(|s| (s.log10() - mean_l).powi(2));
        let cov = src.expect(|s| (m(s) - mean_m) * (s.log10() - mean_l));
        let mean_s2 = src.expect(|s| self.cond_var.eval(s));
        Population {
            mean_mu: mean_m,
            var_mu: mean_s2 + var_m,
            mean_log_sigma: mean_l,
            var_log_sigma: var_l,
            cov_mu_log_sigma: cov,
        }
    }

    /// `beta_mu + cov(mu, log10 sigma) / var(mu) * beta_sigma` from population moments.
    pub fn true_beta(&self) -> Result<f64> {
        match self.mode {
            Some(DgpMode::Linear {
                beta_mu, beta_sigma, ..
            }) => {
                if beta_sigma == 0.0 {
                    return Ok(beta_mu);
                }
                let p = self.population();
                Ok(beta_mu + p.cov_mu_log_sigma / p.var_mu * beta_sigma)
            }
            _ => Err(spec_err("/mode", "true beta needs a linear mode")),
        }
    }

    pub fn nonlinear_truth(&self) -> Result<NonlinearTruth> {
        match self.mode {
            Some(DgpMode::Nonlinear {
                effect,
                effect_scale,
                quantile,
                ..
            }) => {
                let p = self.population();
                let prior = GaussianPrior::new(p.mean_mu, p.var_mu)?;
                let threshold = p.mean_mu + p.var_mu.sqrt() * std_normal_quantile(quantile);
                let tau = match effect_scale {
                    EffectScale::Normalized => effect / (quantile * (1.0 - quantile)).sqrt(),
                    EffectScale::Raw => effect,
                };
                Ok(NonlinearTruth { prior, threshold, tau })
            }
            _ => Err(spec_err("/mode", "nonlinear truth needs a nonlinear mode")),
        }
    }
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    if out.is_empty() {
        "/".into()
    } else {
        out
    }
}

/// One simulated dataset with the design's estimand.
#[derive(Debug, Clone)]
pub struct Draw {
    pub data: ObservationSet,
    pub latent: LatentTruth,
    /// True beta (linear) or tau (nonlinear).
    pub truth: f64,
    /// Nonlinear designs only: the true G and the indicator transform.
    pub prior: Option<GaussianPrior>,
    pub transform: Option<Transform>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws a dataset of size `n` from `spec` using the supplied stream.
pub fn simulate_with(spec: &DgpSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<Draw> {
    let mut y = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    match spec.mode {
        Some(DgpMode::Linear {
            beta_mu,
            beta_sigma,
            noise_sd,
        }) => {
            for _ in 0..n {
                let s = spec.sigma_source.draw(rng);
                let m = spec.cond_mean.eval(s) + spec.cond_var.eval(s).sqrt() * normal(rng);
                let xi = m + s * normal(rng);
                let yi = beta_mu * m + beta_sigma * s.log10() + noise_sd * normal(rng);
                y.push(yi);
                x.push(xi);
                sigma.push(s);
                mu.push(m);
            }
            let data = ObservationSet::new(y, x, sigma)?;
            let latent = LatentTruth::new(mu, &data)?;
            Ok(Draw {
                data,
                latent,
                truth: spec.true_beta()?,
                prior: None,
                transform: None,
            })
        }
        Some(DgpMode::Nonlinear { noise_sd, .. }) => {
            let t = spec.nonlinear_truth()?;
            let sd = t.prior.variance.sqrt();
            for _ in 0..n {
                let s = spec.sigma_source.draw(rng);
                let m = t.prior.mean + sd * normal(rng);
                let xi = m + s * normal(rng);
                let ind = if m > t.threshold { 1.0 } else { 0.0 };
                let yi = t.tau * ind + noise_sd * normal(rng);
                y.push(yi);
                x.push(xi);
                sigma.push(s);
                mu.push(m);
            }
            let data = ObservationSet::new(y, x, sigma)?;
            let latent = LatentTruth::new(mu, &data)?;
            Ok(Draw {
                data,
                latent,
                truth: t.tau,
                prior: Some(t.prior),
                transform: Some(Transform::IndicatorAbove { threshold: t.threshold }),
            })
        }
        None => Err(spec_err("/mode", "outcome coefficients are unset")),
    }
}

/// Linear-mode draw on stream 0 of `seed`.
pub fn simulate_linear(spec: &DgpSpec, n: usize, seed: u64) -> Result<Draw> {
    if !matches!(spec.mode, Some(DgpMode::Linear { .. })) {
        return Err(spec_err("/mode", "expected a linear mode"));
    }
    spec.validate()?;
    simulate_with(spec, n, &mut stream_rng(seed, 0))
}

/// Nonlinear-mode draw on stream 0 of `seed`.
pub fn simulate_nonlinear(spec: &DgpSpec, n: usize, seed: u64) -> Result<Draw> {
    if !matches!(spec.mode, Some(DgpMode::Nonlinear { .. })) {
        return Err(spec_err("/mode", "expected a nonlinear mode"));
    }
    spec.validate()?;
    simulate_with(spec, n, &mut stream_rng(seed, 0))
}

/// Estimates `m(sigma)` and `s^2(sigma) = var(X | sigma) - sigma^2` by local
/// linear regression and stores the observed sigmas as the sigma source.
///
/// Negative `s^2` is clamped at zero; clamping on more than half of the grid
/// is an error.
pub fn calibrate_dgp(data: &ObservationSet, bandwidth: Bandwidth) -> Result<DgpSpec> {
    let m = local_linear_fit(data.sigma(), data.x(), bandwidth)?;
    let sq: Vec<f64> = data
        .x()
        .iter()
        .zip(data.sigma())
        .map(|(&x, &s)| (x - m.eval(s)).powi(2))
        .collect();
    let raw = local_linear_fit(data.sigma(), &sq, bandwidth)?.map(|g, v| v - g * g);
    let clamped = raw.values().iter().filter(|v| **v < 0.0).count();
    let clamped_fraction = clamped as f64 / raw.values().len() as f64;
    if clamped_fraction > 0.5 {
        return Err(Error::CalibrationInfeasible { clamped_fraction });
    }
    let s2 = raw.map(|_, v| v.max(0.0));
    let mut spec = DgpSpec::new(
        SigmaSource::Empirical {
            values: data.sigma().to_vec(),
        },
        m,
        s2,
    )
    .with_n(data.n());
    spec.calibration = Some(CalibrationInfo {
        clamped_fraction,
        bandwidth,
    });
    spec.validate()?;
    Ok(spec)
}

/// Built-in design: `log10 sigma ~ N(log10 0.03, 0.3^2)`,
/// `m(sigma) = 0.06 + 0.03 log10(sigma / 0.03)`, `s(sigma) = 0.02 (sigma / 0.03)^2`,
/// tabulated on 201 log-spaced knots.
pub fn reference_design() -> DgpSpec {
    let (centre, spread) = (0.03f64.log10(), 0.3);
    let knots: Vec<f64> = (0..201)
        .map(|k| 10f64.powf(centre + spread * (-5.0 + 10.0 * k as f64 / 200.0)))
        .collect();
    let mean: Vec<f64> = knots.iter().map(|s| 0.06 + 0.03 * (s / 0.03).log10()).collect();
    let var: Vec<f64> = knots.iter().map(|s| (0.02 * (s / 0.03).powi(2)).powi(2)).collect();
    DgpSpec::new(
        SigmaSource::LogNormal {
            log10_mean: centre,
            log10_sd: spread,
        },
        PiecewiseLinear::new(knots.clone(), mean).expect("increasing knots"),
        PiecewiseLinear::new(knots, var).expect("increasing knots"),
    )
}

/// Built-in nonlinear design: the sigma distribution of [`reference_design`]
/// with `mu ~ N(0.06, 0.03^2)` independent of sigma, so that noise and signal
/// are of similar size.
pub fn reference_nonlinear_design() -> DgpSpec {
    let base = reference_design();
    DgpSpec::new(
        base.sigma_source,
        PiecewiseLinear::constant(0.06),
        PiecewiseLinear::constant(0.03 * 0.03),
    )
}

/// A design at one grid point, with its coordinates.
#[derive(Debug, Clone)]
pub struct Cell {
    pub coords: (f64, f64),
    pub spec: DgpSpec,
}

/// Coordinate names of linear grids.
pub const LINEAR_COORDS: [&str; 2] = ["scaled_beta_mu", "scaled_beta_sigma"];
/// Coordinate names of nonlinear grids.
pub const NONLINEAR_COORDS: [&str; 2] = ["effect", "quantile"];

pub fn default_scaled_beta_mu() -> Vec<f64> {
    (0..11).map(|k| -0.3 + 0.06 * k as f64).collect()
}

pub fn default_scaled_beta_sigma() -> Vec<f64> {
    (0..7).map(|k| 0.05 * k as f64).collect()
}

/// Linear cells over scaled coefficients `sd(mu) beta_mu` and
/// `sd(log10 sigma) beta_sigma`, in row-major order (beta_mu outer).
pub fn linear_grid(base: &DgpSpec, scaled_mu: &[f64], scaled_sigma: &[f64], noise_sd: f64) -> Result<Vec<Cell>> {
    let p = base.population();
    if !(p.var_log_sigma > 0.0) && scaled_sigma.iter().any(|v| *v != 0.0) {
        return Err(spec_err("/sigma_source", "sigma is constant, so beta_sigma cannot be scaled"));
    }
    let mut cells = Vec::new();
    for &a in scaled_mu {
        for &b in scaled_sigma {
            let beta_sigma = if b == 0.0 { 0.0 } else { b / p.var_log_sigma.sqrt() };
            let spec = base.clone().with_mode(DgpMode::Linear {
                beta_mu: a / p.var_mu.sqrt(),
                beta_sigma,
                noise_sd,
            });
            spec.validate()?;
            cells.push(Cell { coords: (a, b), spec });
        }
    }
    Ok(cells)
}

/// Nonlinear cells over normalized effects and threshold quantiles.
pub fn nonlinear_grid(base: &DgpSpec, effects: &[f64], quantiles: &[f64], noise_sd: f64) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for &e in effects {
        for &q in quantiles {
            let spec = base.clone().with_mode(DgpMode::Nonlinear {
                effect: e,
                effect_scale: EffectScale::Normalized,
                quantile: q,
                noise_sd,
            });
            spec.validate()?;
            cells.push(Cell { coords: (e, q), spec });
        }
    }
    Ok(cells)
}

/// Anything that turns a simulated dataset into one number.
pub trait McEstimator: Sync {
    fn name(&self) -> &str;
    fn estimate(&self, draw: &Draw) -> Result<f64>;
}

/// Estimators with a known name.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Classical,
    Shrinkage,
    NaiveOls,
    Oracle,
    Npeb(NpmleConfig),
    Plugin,
}

impl Builtin {
    pub fn linear() -> Vec<Builtin> {
        vec![Builtin::Classical, Builtin::Shrinkage]
    }

    pub fn nonlinear() -> Vec<Builtin> {
        vec![Builtin::Oracle, Builtin::Npeb(NpmleConfig::default()), Builtin::Plugin]
    }
}

fn nonlinear_parts(draw: &Draw) -> Result<(Prior, &Transform)> {
    match (&draw.prior, &draw.transform) {
        (Some(p), Some(f)) => Ok((Prior::Gaussian(*p), f)),
        _ => Err(Error::InvalidInput("estimator needs a nonlinear design".into())),
    }
}

impl McEstimator for Builtin {
    fn name(&self) -> &str {
        match self {
            Builtin::Classical => "classical",
            Builtin::Shrinkage => "shrinkage",
            Builtin::NaiveOls => "naive_ols",
            Builtin::Oracle => "oracle",
            Builtin::Npeb(_) => "npeb",
            Builtin::Plugin => "plugin",
        }
    }

    fn estimate(&self, draw: &Draw) -> Result<f64> {
        let d = &draw.data;
        match self {
            Builtin::Classical => Ok(classical_eiv(&sample_moments(d))?.beta),
            Builtin::Shrinkage => Ok(shrinkage_estimate(d, PriorMoments::Measurement)?.beta),
            Builtin::NaiveOls => Ok(naive_ols(&sample_moments(d))?.beta),
            Builtin::Oracle => {
                let (p, f) = nonlinear_parts(draw)?;
                Ok(oracle_tau(d, &p, f)?.tau)
            }
            Builtin::Npeb(cfg) => {
                let (_, f) = nonlinear_parts(draw)?;
                Ok(npeb_tau(d, f, cfg)?.tau)
            }
            Builtin::Plugin => {
                let (p, f) = nonlinear_parts(draw)?;
                Ok(plugin_tau(d, &p, f)?.tau)
            }
        }
    }
}

/// A named closure estimator.
pub struct FnEstimator<F> {
    pub name: String,
    pub f: F,
}

impl<F> McEstimator for FnEstimator<F>
where
    F: Fn(&Draw) -> Result<f64> + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn estimate(&self, draw: &Draw) -> Result<f64> {
        (self.f)(draw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub reps: usize,
    pub seed: u64,
    pub threads: usize,
    /// Overrides each cell's `n`.
    pub n: Option<usize>,
}

impl McConfig {
    pub fn new(reps: usize, seed: u64) -> Self {
        McConfig {
            reps,
            seed,
            threads: 1,
            n: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: String,
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
    pub replications: usize,
    pub failures: usize,
    /// More than 10% of replications failed.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: usize,
    pub coords: (f64, f64),
    pub truth: f64,
    pub estimators: Vec<EstimatorSummary>,
}

impl CellSummary {
    pub fn get(&self, name: &str) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.estimator == name)
    }

    /// `ln(mse_a / mse_b)`.
    pub fn log_mse_ratio(&self, a: &str, b: &str) -> Option<f64> {
        Some((self.get(a)?.mse / self.get(b)?.mse).ln())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub coord_names: [String; 2],
    pub cells: Vec<CellSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub cell: usize,
    pub rep: usize,
    pub estimator: String,
    pub estimate: Option<f64>,
    pub truth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub summary: McSummary,
    pub replications: Vec<Replication>,
}

/// Runs `config.reps` replications of every cell. Replication `r` of cell `c`
/// draws from stream `(c << 32) | r` of `config.seed`.
pub fn run_monte_carlo(
    cells: &[Cell],
    coord_names: [&str; 2],
    estimators: &[&dyn McEstimator],
    config: &McConfig,
) -> Result<McRun> {
    if config.reps < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 replications, got {}", config.reps)));
    }
    if estimators.is_empty() {
        return Err(Error::InvalidInput("no estimators".into()));
    }
    for c in cells {
        c.spec.validate()?;
    }
    let reps = config.reps;
    let results: Vec<(f64, Vec<Option<f64>>)> = par_map(config.threads, cells.len() * reps, |t| {
        let (c, r) = (t / reps, t % reps);
        let spec = &cells[c].spec;
        let mut rng = stream_rng(config.seed, cell_stream(c, r));
        match simulate_with(spec, config.n.unwrap_or(spec.n), &mut rng) {
            Ok(draw) => (
                draw.truth,
                estimators
                    .iter()
                    .map(|e| e.estimate(&draw).ok().filter(|v| v.is_finite()))
                    .collect(),
            ),
            Err(_) => (f64::NAN, vec![None; estimators.len()]),
        }
    });

    let mut replications = Vec::with_capacity(results.len() * estimators.len());
    let mut summaries = Vec::with_capacity(cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let block = &results[c * reps..(c + 1) * reps];
        let truth = match cell.spec.mode {
            Some(DgpMode::Linear { .. }) => cell.spec.true_beta()?,
            _ => cell.spec.nonlinear_truth()?.tau,
        };
        for (r, (_, ests)) in block.iter().enumerate() {
            for (e, v) in estimators.iter().zip(ests) {
                replications.push(Replication {
                    cell: c,
                    rep: r,
                    estimator: e.name().to_string(),
                    estimate: *v,
                    truth,
                });
            }
        }
        let estimators = estimators
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let vals: Vec<f64> = block.iter().filter_map(|(_, v)| v[k]).collect();
                let m = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / m;
                let variance = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
                let mse = vals.iter().map(|v| (v - truth).powi(2)).sum::<f64>() / m;
                let failures = reps - vals.len();
                EstimatorSummary {
                    estimator: e.name().to_string(),
                    mean,
                    bias: mean - truth,
                    variance,
                    mse,
                    replications: vals.len(),
                    failures,
                    flagged: failures * 10 > reps,
                }
            })
            .collect();
        summaries.push(CellSummary {
            cell: c,
            coords: cell.coords,
            truth,
            estimators,
        });
    }
    Ok(McRun {
        summary: McSummary {
            coord_names: coord_names.map(String::from),
            cells: summaries,
        },
        replications,
    })
}

impl McSummary {
    /// Long format: `cell,<coord_a>,<coord_b>,estimator,statistic,value`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["cell", &self.coord_names[0], &self.coord_names[1], "estimator", "statistic", "value"])?;
        for c in &self.cells {
            for e in &c.estimators {
                let stats = [
                    ("truth", c.truth),
                    ("mean", e.mean),
                    ("bias", e.bias),
                    ("variance", e.variance),
                    ("mse", e.mse),
                    ("replications", e.replications as f64),
                    ("failures", e.failures as f64),
                    ("flagged", if e.flagged { 1.0 } else { 0.0 }),
                ];
                for (name, v) in stats {
                    w.write_record([
                        c.cell.to_string(),
                        c.coords.0.to_string(),
                        c.coords.1.to_string(),
                        e.estimator.clone(),
                        name.to_string(),
                        v.to_string(),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("<summary>", e))?;
        Ok(())
    }
}

/// `cell,rep,estimator,estimate,truth`; failed estimates are left empty.
pub fn write_replications<W: Write>(records: &[Replication], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["cell", "rep", "estimator", "estimate", "truth"])?;
    for r in records {
        w.write_record([
            r.cell.to_string(),
            r.rep.to_string(),
            r.estimator.clone(),
            r.estimate.map(|v| v.to_string()).unwrap_or_default(),
            r.truth.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<replications>", e))?;
    Ok(())
}
