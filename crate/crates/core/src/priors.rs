//! Discrete priors fitted by nonparametric maximum likelihood, and posterior
//! means of transforms of the latent attribute.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use gauss_quad::GaussHermite;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::ObservationSet;
use crate::error::{Error, Result};
use crate::linear::GaussianPrior;
use crate::smooth::PiecewiseLinear;

const HERMITE_NODES: usize = 64;

fn hermite() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(HERMITE_NODES).expect("valid Gauss-Hermite degree"))
}

pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    static N: OnceLock<Normal> = OnceLock::new();
    N.get_or_init(|| Normal::new(0.0, 1.0).unwrap()).cdf(z)
}

pub(crate) fn std_normal_quantile(p: f64) -> f64 {
    static N: OnceLock<Normal> = OnceLock::new();
    N.get_or_init(|| Normal::new(0.0, 1.0).unwrap()).inverse_cdf(p)
}

/// `E[g(Z)]` for `Z ~ N(mean, var)` by 64-node Gauss-Hermite quadrature.
pub(crate) fn normal_expectation(mean: f64, var: f64, g: impl Fn(f64) -> f64) -> f64 {
    let scale = (2.0 * var).sqrt();
    hermite().integrate(|t| g(mean + scale * t)) / std::f64::consts::PI.sqrt()
}

/// A function `f` of the latent attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    Identity,
    /// `1(mu > threshold)`, strict.
    IndicatorAbove { threshold: f64 },
    /// Linear interpolation of a user table, flat beyond its ends.
    UserTable { table: PiecewiseLinear },
}

impl Transform {
    pub fn eval(&self, mu: f64) -> f64 {
        match self {
            Transform::Identity => mu,
            Transform::IndicatorAbove { threshold } => {
                if mu > *threshold {
                    1.0
                } else {
                    0.0
                }
            }
            Transform::UserTable { table } => table.eval(mu),
        }
    }

    /// Sup-norm bound; infinite for the identity.
    pub fn bound(&self) -> f64 {
        match self {
            Transform::Identity => f64::INFINITY,
            Transform::IndicatorAbove { .. } => 1.0,
            Transform::UserTable { table } => table.max_value().abs().max(table.min_value().abs()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Transform::Identity => "identity".into(),
            Transform::IndicatorAbove { threshold } => format!("above:{threshold}"),
            Transform::UserTable { .. } => "table".into(),
        }
    }
}

/// Probability masses on a sorted grid of atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePrior {
    support: Vec<f64>,
    mass: Vec<f64>,
}

impl DiscretePrior {
    pub fn new(support: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != mass.len() {
            return Err(Error::InvalidInput("prior needs one mass per atom and at least one atom".into()));
        }
        if support.iter().any(|s| !s.is_finite()) || support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("prior support must be finite and strictly increasing".into()));
        }
        if mass.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidInput("prior masses must be finite and nonnegative".into()));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("prior masses sum to {total}, not 1")));
        }
        Ok(DiscretePrior { support, mass })
    }

    pub fn point_mass(at: f64) -> Self {
        DiscretePrior {
            support: vec![at],
            mass: vec![1.0],
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.mass).map(|(s, m)| s * m).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.support.iter().zip(&self.mass).map(|(s, m)| m * (s - mu) * (s - mu)).sum()
    }

    /// Two-column CSV with header `support,mass`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["support", "mass"])?;
        for (s, m) in self.support.iter().zip(&self.mass) {
            w.write_record([format!("{s:?}"), format!("{m:?}")])?;
        }
        w.flush().map_err(|e| Error::io("<prior>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::MissingColumn(name.into()))
        };
        let (si, mi) = (col("support")?, col("mass")?);
        let (mut support, mut mass) = (Vec::new(), Vec::new());
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            for (idx, name, dst) in [(si, "support", &mut support), (mi, "mass", &mut mass)] {
                let cell = rec.get(idx).unwrap_or("").trim();
                let v: f64 = cell.parse().map_err(|_| Error::BadCell {
                    row: row + 1,
                    column: name.into(),
                    reason: format!("not a number: `{cell}`"),
                })?;
                dst.push(v);
            }
        }
        DiscretePrior::new(support, mass)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        self.write_csv(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::read_csv(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NpmleConfig {
    pub grid_size: usize,
    /// Stop once the relative log-likelihood gain of an iteration drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Grid end points; defaults to the data range padded by half the largest sigma.
    pub bounds: Option<(f64, f64)>,
}

impl Default for NpmleConfig {
    fn default() -> Self {
        NpmleConfig {
            grid_size: 300,
            tol: 1e-8,
            max_iter: 2000,
            bounds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpmleFit {
    pub prior: DiscretePrior,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood before the first update and after each one.
    pub trace: Vec<f64>,
}

// Likelihood matrix with each row divided by its largest entry, stored as f32
// to halve memory traffic (sums are taken in f64). Entries are Gaussian in the
// atom index, so each row keeps only its contiguous run of nonzero values.
struct Kernel {
    values: Vec<f32>,
    // (first atom, start in `values`, length) per row.
    rows: Vec<(usize, usize, usize)>,
    offset: f64,
}

impl Kernel {
    fn new(x: &[f64], sigma: &[f64], support: &[f64]) -> Self {
        let k = support.len();
        let mut values = Vec::new();
        let mut rows = Vec::with_capacity(x.len());
        let mut log_row = vec![0.0; k];
        let mut offset = 0.0;
        let half_log_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
        for (&xi, &si) in x.iter().zip(sigma) {
            let mut top = f64::NEG_INFINITY;
            for (cell, &s) in log_row.iter_mut().zip(support) {
                let z = (xi - s) / si;
                *cell = -0.5 * z * z;
                top = top.max(*cell);
            }
            // Subnormal entries are dropped: they are far too small to matter and
            // arithmetic on them is very slow.
            let row: Vec<f32> = log_row
                .iter()
                .map(|&l| (l - top).exp() as f32)
                .map(|v| if v < f32::MIN_POSITIVE { 0.0 } else { v })
                .collect();
            let first = row.iter().position(|&v| v > 0.0).unwrap_or(0);
            let last = row.iter().rposition(|&v| v > 0.0).unwrap_or(0);
            rows.push((first, values.len(), last + 1 - first));
            values.extend_from_slice(&row[first..=last]);
            offset += top - si.ln() - half_log_2pi;
        }
        Kernel { values, rows, offset }
    }

    // Log-likelihood at `mass` and the EM multipliers sum_i L_ik / L_i. Atoms
    // outside the span of nonzero mass are skipped; their multipliers are left
    // at zero.
    fn pass(&self, mass: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let lo = mass.iter().position(|&m| m > 0.0).unwrap_or(0);
        let hi = mass.iter().rposition(|&m| m > 0.0).map_or(0, |i| i + 1);
        let mut ll = self.offset;
        for &(first, start, len) in &self.rows {
            let (a, b) = (first.max(lo), (first + len).min(hi));
            if a >= b {
                return f64::NEG_INFINITY;
            }
            let row = &self.values[start + a - first..start + b - first];
            let dens = dot(row, &mass[a..b]);
            ll += dens.ln();
            let inv = 1.0 / dens;
            for (g, &l) in grad[a..b].iter_mut().zip(row) {
                *g += f64::from(l) * inv;
            }
        }
        ll
    }
}

// Independent partial sums so the loop vectorizes.
fn dot(a: &[f32], b: &[f64]) -> f64 {
    const L: usize = 16;
    let mut acc = [0.0; L];
    let (ca, cb) = (a.chunks_exact(L), b.chunks_exact(L));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(&x, y)| f64::from(x) * y).sum();
    for (x, y) in ca.zip(cb) {
        let x: &[f32; L] = x.try_into().unwrap();
        let y: &[f64; L] = y.try_into().unwrap();
        for l in 0..L {
            acc[l] += f64::from(x[l]) * y[l];
        }
    }
    acc.iter().sum::<f64>() + tail
}

const MASS_FLOOR: f64 = 1e-250;

/// Default NPMLE grid for the data.
pub fn npmle_grid(data: &ObservationSet, config: &NpmleConfig) -> Vec<f64> {
    let (lo, hi) = config.bounds.unwrap_or_else(|| {
        let smax = data.sigma().iter().copied().fold(0.0, f64::max);
        let xmin = data.x().iter().copied().fold(f64::INFINITY, f64::min);
        let xmax = data.x().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (xmin - 0.5 * smax, xmax + 0.5 * smax)
    });
    let k = config.grid_size;
    (0..k).map(|j| lo + (hi - lo) * j as f64 / (k - 1) as f64).collect()
}

/// Nonparametric maximum likelihood prior on a fixed grid, fitted by EM.
pub fn fit_npmle(data: &ObservationSet, config: &NpmleConfig) -> Result<NpmleFit> {
    if config.grid_size < 2 {
        return Err(Error::InvalidInput("NPMLE grid needs at least 2 atoms".into()));
    }
    if let Some((lo, hi)) = config.bounds {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!("bad NPMLE grid bounds ({lo}, {hi})")));
        }
    }
    let support = npmle_grid(data, config);
    let kernel = Kernel::new(data.x(), data.sigma(), &support);
    let n = data.n() as f64;
    let k = support.len();
    let mut mass = vec![1.0 / k as f64; k];
    let mut grad = vec![0.0; k];

    let mut ll = kernel.pass(&mass, &mut grad);
    if !ll.is_finite() {
        return Err(Error::NonFiniteLikelihood { iteration: 0 });
    }
    let mut trace = vec![ll];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        for (m, g) in mass.iter_mut().zip(&grad) {
            *m *= g / n;
            // EM only drives such atoms further towards zero, through the slow
            // subnormal range.
            if *m < MASS_FLOOR {
                *m = 0.0;
            }
        }
        iterations += 1;
        let next = kernel.pass(&mass, &mut grad);
        if !next.is_finite() {
            return Err(Error::NonFiniteLikelihood { iteration: iterations });
        }
        debug_assert!(
            next >= ll - 1e-10 * ll.abs().max(1.0),
            "EM step {iterations} decreased the log-likelihood: {ll} -> {next}"
        );
        trace.push(next);
        let gain = (next - ll) / ll.abs().max(f64::MIN_POSITIVE);
        ll = next;
        if gain < config.tol {
            converged = true;
            break;
        }
    }
    let total: f64 = mass.iter().sum();
    mass.iter_mut().for_each(|m| *m /= total);
    Ok(NpmleFit {
        prior: DiscretePrior { support, mass },
        log_likelihood: ll,
        iterations,
        converged,
        trace,
    })
}

/// `E[f(mu) | X = x, sigma]` under a normal prior.
pub fn posterior_mean_gaussian(prior: &GaussianPrior, f: &Transform, x: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let pm = prior.shrink(x, s2);
    match f {
        Transform::Identity => pm,
        Transform::IndicatorAbove { threshold } => {
            let sd = prior.posterior_variance(s2).sqrt();
            std_normal_cdf((pm - threshold) / sd)
        }
        Transform::UserTable { table } => normal_expectation(pm, prior.posterior_variance(s2), |m| table.eval(m)),
    }
}

/// `E[f(mu) | X = x, sigma]` under a discrete prior, by log-sum-exp over live atoms.
pub fn posterior_mean_discrete(prior: &DiscretePrior, f: &Transform, x: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !x.is_finite() {
        return Err(Error::InvalidInput(format!("posterior needs finite x and sigma > 0, got ({x}, {sigma})")));
    }
    let mut top = f64::NEG_INFINITY;
    let logw: Vec<f64> = prior
        .support
        .iter()
        .zip(&prior.mass)
        .map(|(&s, &m)| {
            if m > 0.0 {
                let z = (x - s) / sigma;
                let lw = m.ln() - 0.5 * z * z;
                top = top.max(lw);
                lw
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    if !top.is_finite() {
        return Err(Error::PosteriorUnderflow {
            x,
            sigma,
            lo: prior.support[0],
            hi: prior.support[prior.support.len() - 1],
        });
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (&s, &lw) in prior.support.iter().zip(&logw) {
        if lw > f64::NEG_INFINITY {
            let w = (lw - top).exp();
            num += w * f.eval(s);
            den += w;
        }
    }
    Ok(num / den)
}
