//! Sample-moment algebra and Frisch-Waugh-Lovell partialling.
//!
//! Every moment uses divisor `n` (or the total weight), i.e.
//! `var_n(W) = E_n[W^2] - E_n[W]^2`, never `n - 1`. The classical
//! corrected slope depends on this convention in finite samples.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::ObservationSet;
use crate::error::{Error, Result};
use crate::linalg::PivotedQr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean_y: f64,
    pub mean_x: f64,
    pub var_y: f64,
    pub var_x: f64,
    pub cov_xy: f64,
    /// Mean of `sigma_i^2`.
    pub mean_sigma2: f64,
    pub n: usize,
    pub weighted: bool,
}

impl MomentSummary {
    /// Moments straight from slices, bypassing [`ObservationSet`] validation.
    ///
    /// `sigma2` may contain zeros here, which is how the no-measurement-error
    /// limit is exercised.
    pub fn from_slices(y: &[f64], x: &[f64], sigma2: &[f64], weights: Option<&[f64]>) -> Result<Self> {
        let n = y.len();
        if x.len() != n || sigma2.len() != n || weights.is_some_and(|w| w.len() != n) {
            return Err(Error::InvalidInput("moment inputs differ in length".into()));
        }
        if n == 0 {
            return Err(Error::InvalidInput("no observations".into()));
        }
        match weights {
            None => Ok(accumulate(y, x, sigma2, |_| 1.0, false)),
            Some(w) => {
                check_weights(w)?;
                Ok(accumulate(y, x, sigma2, |i| w[i], true))
            }
        }
    }

    /// OLS slope of Y on X, `cov_n(Y, X) / var_n(X)`.
    pub fn naive_slope(&self) -> f64 {
        self.cov_xy / self.var_x
    }

    /// `var_n(X) - E_n[sigma^2]`, the moment estimate of the latent variance.
    pub fn signal_variance(&self) -> f64 {
        self.var_x - self.mean_sigma2
    }
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }
    if !(w.iter().sum::<f64>() > 0.0) {
        return Err(Error::InvalidInput("weights sum to zero".into()));
    }
    Ok(())
}

// Shared by the weighted and unweighted paths so that unit weights reproduce
// the unweighted moments bit for bit.
fn accumulate(y: &[f64], x: &[f64], s2: &[f64], w: impl Fn(usize) -> f64, weighted: bool) -> MomentSummary {
    let n = y.len();
    let mut sw = 0.0;
    let mut sy = 0.0;
    let mut sx = 0.0;
    let mut ss = 0.0;
    for i in 0..n {
        let wi = w(i);
        sw += wi;
        sy += wi * y[i];
        sx += wi * x[i];
        ss += wi * s2[i];
    }
    let mean_y = sy / sw;
    let mean_x = sx / sw;
    let mut vy = 0.0;
    let mut vx = 0.0;
    let mut cxy = 0.0;
    for i in 0..n {
        let wi = w(i);
        let dy = y[i] - mean_y;
        let dx = x[i] - mean_x;
        vy += wi * dy * dy;
        vx += wi * dx * dx;
        cxy += wi * dx * dy;
    }
    MomentSummary {
        mean_y,
        mean_x,
        var_y: vy / sw,
        var_x: vx / sw,
        cov_xy: cxy / sw,
        mean_sigma2: ss / sw,
        n,
        weighted,
    }
}

pub fn sample_moments(data: &ObservationSet) -> MomentSummary {
    accumulate(data.y(), data.x(), &data.sigma2(), |_| 1.0, false)
}

/// Moments under normalized weights `W_i = w_i / sum_j w_j`.
pub fn weighted_moments(data: &ObservationSet, weights: &[f64]) -> Result<MomentSummary> {
    if weights.len() != data.n() {
        return Err(Error::InvalidInput(format!(
            "{} weights for {} units",
            weights.len(),
            data.n()
        )));
    }
    check_weights(weights)?;
    Ok(accumulate(data.y(), data.x(), &data.sigma2(), |i| weights[i], true))
}

/// Residualizes Y and X on `[1, Z]`, keeping sigma and weights.
///
/// The projection is weighted when the data carry weights. The returned set
/// has no covariates. Dependent columns are reported by their 0-based index
/// among the covariates; a column that is constant is collinear with the
/// intercept.
pub fn partial_out(data: &ObservationSet) -> Result<ObservationSet> {
    let cov = data
        .covariates()
        .filter(|c| !c.is_empty())
        .ok_or_else(|| Error::InvalidInput("partialling requires covariates".into()))?;
    let w = data.weights_or_unit();
    let sw: f64 = w.iter().sum();
    let n = data.n();
    let center = |v: &[f64]| {
        let m = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
        v.iter().map(|a| a - m).collect::<Vec<_>>()
    };
    let yc = center(data.y());
    let xc = center(data.x());
    let zc: Vec<Vec<f64>> = cov.columns().iter().map(|c| center(c)).collect();

    // Weighted least squares on sqrt(w)-scaled rows, columns normalized so the
    // pivot threshold is scale free.
    let sqw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let k = zc.len();
    let mut scales = vec![0.0; k];
    let mut design = DMatrix::zeros(n, k);
    for (j, col) in zc.iter().enumerate() {
        let norm = col.iter().zip(&sqw).map(|(v, s)| (v * s).powi(2)).sum::<f64>().sqrt();
        scales[j] = norm;
        if norm > 0.0 {
            for i in 0..n {
                design[(i, j)] = col[i] * sqw[i] / norm;
            }
        }
    }
    // Centering can leave rounding noise in a constant column; compare its
    // norm against the raw column norm before pivoting.
    let mut dependent: Vec<usize> = (0..k)
        .filter(|&j| {
            let raw = cov.columns()[j].iter().zip(&sqw).map(|(v, s)| (v * s).powi(2)).sum::<f64>().sqrt();
            scales[j] <= 1e-12 * raw
        })
        .collect();
    let qr = PivotedQr::new(design);
    dependent.extend(qr.dependent_columns());
    dependent.sort_unstable();
    dependent.dedup();
    if !dependent.is_empty() {
        return Err(Error::Collinear { columns: dependent });
    }
    let resid = |v: &[f64]| {
        let rhs: Vec<f64> = v.iter().zip(&sqw).map(|(a, s)| a * s).collect();
        let b = qr.solve(&rhs);
        (0..n)
            .map(|i| v[i] - (0..k).map(|j| zc[j][i] / scales[j] * b[j]).sum::<f64>())
            .collect::<Vec<_>>()
    };
    Ok(data.with_residualized(resid(&yc), resid(&xc)))
}
