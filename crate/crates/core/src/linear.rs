//! Estimators of the projection coefficient of an outcome on a latent attribute.
//!
//! The classical corrected slope `cov_n(Y, X) / (var_n(X) - E_n[sigma^2])`
//! is consistent under measurement error alone. Regressing on empirical Bayes
//! posterior means ("regress-on-shrinkage") matches it only when sigma carries
//! no information about the latent attribute or the outcome; with constant
//! sigma the two coincide exactly.
//!
//! Student-level data support two further routes: a two-stage least squares
//! fit instrumenting `X_ij` with the leave-one-out teacher mean, and a plug-in
//! solution of the normal equations with debiased moments. The two agree
//! to machine precision when covariates are constant within teacher.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{mean, GroupedData, ObservationSet};
use crate::error::{Error, Result};
use crate::linalg::solve_square;
use crate::moments::{sample_moments, weighted_moments, MomentSummary};

/// Relative floor applied to prior variances and estimator denominators.
pub const VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearEstimator {
    Classical,
    Shrinkage,
    WeightedClassical,
    WeightedShrinkage,
    TwoSided,
    LooIv,
    DebiasedMoment,
    NaiveOls,
}

impl LinearEstimator {
    pub fn as_str(&self) -> &'static str {
        match self {
            LinearEstimator::Classical => "classical",
            LinearEstimator::Shrinkage => "shrinkage",
            LinearEstimator::WeightedClassical => "weighted_classical",
            LinearEstimator::WeightedShrinkage => "weighted_shrinkage",
            LinearEstimator::TwoSided => "two_sided",
            LinearEstimator::LooIv => "loo_iv",
            LinearEstimator::DebiasedMoment => "debiased_moment",
            LinearEstimator::NaiveOls => "naive_ols",
        }
    }

    /// True for the estimators that need student-level data.
    pub fn needs_groups(&self) -> bool {
        matches!(
            self,
            LinearEstimator::TwoSided | LinearEstimator::LooIv | LinearEstimator::DebiasedMoment
        )
    }
}

impl std::str::FromStr for LinearEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "classical" => LinearEstimator::Classical,
            "shrinkage" => LinearEstimator::Shrinkage,
            "weighted_classical" => LinearEstimator::WeightedClassical,
            "weighted_shrinkage" => LinearEstimator::WeightedShrinkage,
            "two_sided" => LinearEstimator::TwoSided,
            "loo_iv" => LinearEstimator::LooIv,
            "debiased_moment" => LinearEstimator::DebiasedMoment,
            "naive_ols" => LinearEstimator::NaiveOls,
            other => return Err(Error::InvalidInput(format!("unknown linear estimator `{other}`"))),
        })
    }
}

/// Normal prior `N(mean, variance)` for the latent attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPrior {
    pub mean: f64,
    pub variance: f64,
    /// Set when the moment estimate fell below the variance floor.
    #[serde(default)]
    pub floored: bool,
}

impl GaussianPrior {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::InvalidInput(format!(
                "prior needs finite mean and positive variance, got N({mean}, {variance})"
            )));
        }
        Ok(GaussianPrior {
            mean,
            variance,
            floored: false,
        })
    }

    /// Posterior mean of `mu` given `x` with noise variance `sigma2`.
    pub fn shrink(&self, x: f64, sigma2: f64) -> f64 {
        let total = sigma2 + self.variance;
        sigma2 / total * self.mean + self.variance / total * x
    }

    /// Posterior variance `v s^2 / (v + s^2)`.
    pub fn posterior_variance(&self, sigma2: f64) -> f64 {
        self.variance * sigma2 / (self.variance + sigma2)
    }
}

/// Which moments the parametric prior is fitted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorMoments {
    /// `mean = E_n[X]`, `variance = var_n(X) - E_n[sigma^2]`.
    #[default]
    Measurement,
    /// `mean = E_n[Y]`, `variance = var_n(Y) - E_n[sigma^2]`, kept for
    /// reproducing published regress-on-shrinkage numbers that used it.
    Outcome,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateMeta {
    pub prior: Option<GaussianPrior>,
    pub weighted: bool,
    /// Uncorrected OLS slope of Y on X.
    pub naive_slope: Option<f64>,
    /// `var(X) / (var(X) - E[sigma^2])`.
    pub inflation_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearEstimate {
    pub estimator: LinearEstimator,
    pub beta: f64,
    pub intercept: f64,
    pub covariate_coefs: Option<Vec<f64>>,
    pub meta: EstimateMeta,
}

fn floor_for(m: &MomentSummary) -> f64 {
    VARIANCE_FLOOR * m.var_x
}

// cov / (var_x - E sigma^2) with an optional cross-noise correction subtracted
// from the numerator. A zero correction leaves the numerator bit-identical.
fn corrected_slope(m: &MomentSummary, cross: f64, id: LinearEstimator) -> Result<LinearEstimate> {
    let den = m.var_x - m.mean_sigma2;
    if !(den > floor_for(m)) {
        return Err(Error::SignalVarianceNotIdentified { value: den });
    }
    let beta = (m.cov_xy - cross) / den;
    if !beta.is_finite() {
        return Err(Error::SignalVarianceNotIdentified { value: den });
    }
    Ok(LinearEstimate {
        estimator: id,
        beta,
        intercept: m.mean_y - beta * m.mean_x,
        covariate_coefs: None,
        meta: EstimateMeta {
            prior: None,
            weighted: m.weighted,
            naive_slope: Some(m.naive_slope()),
            inflation_factor: Some(m.var_x / den),
        },
    })
}

/// Classical errors-in-variables slope from sample moments.
pub fn classical_eiv(m: &MomentSummary) -> Result<LinearEstimate> {
    corrected_slope(m, 0.0, LinearEstimator::Classical)
}

/// OLS of Y on X ignoring measurement error.
pub fn naive_ols(m: &MomentSummary) -> Result<LinearEstimate> {
    if !(m.var_x > 0.0) {
        return Err(Error::DegenerateRegressor("X has zero variance".into()));
    }
    let beta = m.naive_slope();
    Ok(LinearEstimate {
        estimator: LinearEstimator::NaiveOls,
        beta,
        intercept: m.mean_y - beta * m.mean_x,
        covariate_coefs: None,
        meta: EstimateMeta {
            weighted: m.weighted,
            naive_slope: Some(beta),
            ..Default::default()
        },
    })
}

pub fn fit_gaussian_prior(m: &MomentSummary) -> GaussianPrior {
    fit_gaussian_prior_with(m, PriorMoments::Measurement)
}

/// Moment-matched normal prior, floored at `VARIANCE_FLOOR * var_n(X)`.
pub fn fit_gaussian_prior_with(m: &MomentSummary, source: PriorMoments) -> GaussianPrior {
    let (mean, raw) = match source {
        PriorMoments::Measurement => (m.mean_x, m.var_x - m.mean_sigma2),
        PriorMoments::Outcome => (m.mean_y, m.var_y - m.mean_sigma2),
    };
    let floor = floor_for(m).max(f64::MIN_POSITIVE);
    if raw > floor {
        GaussianPrior {
            mean,
            variance: raw,
            floored: false,
        }
    } else {
        GaussianPrior {
            mean,
            variance: floor,
            floored: true,
        }
    }
}

/// Per-unit posterior means under a normal prior.
pub fn linear_shrinkage(data: &ObservationSet, prior: &GaussianPrior) -> Vec<f64> {
    data.x()
        .iter()
        .zip(data.sigma())
        .map(|(&x, &s)| prior.shrink(x, s * s))
        .collect()
}

fn slope_on(
    y: &[f64],
    r: &[f64],
    weights: Option<&[f64]>,
    floor: f64,
    id: LinearEstimator,
) -> Result<LinearEstimate> {
    let zeros = vec![0.0; y.len()];
    let m = MomentSummary::from_slices(y, r, &zeros, weights)?;
    if !(m.var_x > floor) {
        return Err(Error::DegenerateRegressor(format!(
            "shrunk regressor variance {} is below the floor {floor}",
            m.var_x
        )));
    }
    let beta = m.naive_slope();
    Ok(LinearEstimate {
        estimator: id,
        beta,
        intercept: m.mean_y - beta * m.mean_x,
        covariate_coefs: None,
        meta: EstimateMeta {
            weighted: weights.is_some(),
            ..Default::default()
        },
    })
}

/// OLS of Y on supplied posterior means.
pub fn regress_on_shrinkage(data: &ObservationSet, posterior_means: &[f64]) -> Result<LinearEstimate> {
    if posterior_means.len() != data.n() {
        return Err(Error::InvalidInput("one posterior mean per unit required".into()));
    }
    let floor = floor_for(&sample_moments(data));
    slope_on(data.y(), posterior_means, None, floor, LinearEstimator::Shrinkage)
}

/// Fits the normal prior, shrinks, and regresses Y on the shrunk values.
pub fn shrinkage_estimate(data: &ObservationSet, source: PriorMoments) -> Result<LinearEstimate> {
    let m = sample_moments(data);
    let prior = fit_gaussian_prior_with(&m, source);
    let means = linear_shrinkage(data, &prior);
    let mut est = regress_on_shrinkage(data, &means)?;
    est.meta.prior = Some(prior);
    est.meta.naive_slope = Some(m.naive_slope());
    Ok(est)
}

/// Weighted analogue of the classical slope.
pub fn weighted_classical_eiv(data: &ObservationSet, weights: &[f64]) -> Result<LinearEstimate> {
    let m = weighted_moments(data, weights)?;
    corrected_slope(&m, 0.0, LinearEstimator::WeightedClassical)
}

/// Weighted slope corrected for correlated noise in Y and X.
///
/// `cov12[i]` is the sampling covariance of unit i's outcome and measurement
/// errors; its weighted mean is subtracted from the numerator.
pub fn two_sided_corrected(data: &ObservationSet, weights: &[f64], cov12: &[f64]) -> Result<LinearEstimate> {
    if cov12.len() != data.n() {
        return Err(Error::InvalidInput("one cross covariance per unit required".into()));
    }
    if let Some(i) = cov12.iter().position(|v| !v.is_finite()) {
        return Err(Error::BadCell {
            row: i + 1,
            column: "cov12".into(),
            reason: "non-finite cross covariance".into(),
        });
    }
    let m = weighted_moments(data, weights)?;
    let sw: f64 = weights.iter().sum();
    let cross = weights.iter().zip(cov12).map(|(w, c)| w * c).sum::<f64>() / sw;
    corrected_slope(&m, cross, LinearEstimator::TwoSided)
}

/// Weighted regress-on-shrinkage with a prior fitted from weighted moments.
pub fn weighted_shrinkage(data: &ObservationSet, weights: &[f64], source: PriorMoments) -> Result<LinearEstimate> {
    let m = weighted_moments(data, weights)?;
    let prior = fit_gaussian_prior_with(&m, source);
    let means = linear_shrinkage(data, &prior);
    let mut est = slope_on(
        data.y(),
        &means,
        Some(weights),
        floor_for(&m),
        LinearEstimator::WeightedShrinkage,
    )?;
    est.meta.prior = Some(prior);
    est.meta.naive_slope = Some(m.naive_slope());
    Ok(est)
}

/// Per-teacher cross covariance of `(y_ij, x_ij)` (divisor `N_i - 1`) over `N_i`.
pub fn estimate_cov12(grouped: &GroupedData) -> Vec<f64> {
    grouped
        .groups()
        .iter()
        .map(|g| {
            let n = g.size() as f64;
            let (my, mx) = (mean(&g.y), mean(&g.x));
            let c = g.y.iter().zip(&g.x).map(|(y, x)| (y - my) * (x - mx)).sum::<f64>() / (n - 1.0);
            c / n
        })
        .collect()
}

// Stacked student-level columns: y, x, leave-one-out x and covariates.
struct Stacked {
    y: Vec<f64>,
    x: Vec<f64>,
    loo: Vec<f64>,
    z: Vec<Vec<f64>>,
}

fn stack(grouped: &GroupedData) -> Stacked {
    let k = grouped.covariate_names().len();
    let mut s = Stacked {
        y: Vec::with_capacity(grouped.n_students()),
        x: Vec::with_capacity(grouped.n_students()),
        loo: Vec::with_capacity(grouped.n_students()),
        z: vec![Vec::with_capacity(grouped.n_students()); k],
    };
    for g in grouped.groups() {
        s.y.extend_from_slice(&g.y);
        s.x.extend_from_slice(&g.x);
        s.loo.extend(g.leave_one_out_x());
        for (dst, src) in s.z.iter_mut().zip(&g.z) {
            dst.extend_from_slice(src);
        }
    }
    s
}

fn check_first_stage(s: &Stacked) -> Result<()> {
    let zeros = vec![0.0; s.x.len()];
    let m = MomentSummary::from_slices(&s.loo, &s.x, &zeros, None)?;
    if !(m.cov_xy.abs() > VARIANCE_FLOOR * m.var_x) {
        return Err(Error::ZeroFirstStage(format!(
            "cov(leave-one-out mean, x) = {} with var(x) = {}",
            m.cov_xy, m.var_x
        )));
    }
    Ok(())
}

fn from_theta(theta: DVector<f64>, id: LinearEstimator, k: usize) -> Result<LinearEstimate> {
    Ok(LinearEstimate {
        estimator: id,
        beta: theta[1],
        intercept: theta[0],
        covariate_coefs: (k > 0).then(|| theta.iter().skip(2).copied().collect()),
        meta: EstimateMeta::default(),
    })
}

/// Just-identified IV of `y_ij` on `(1, x_ij, z_ij)` with `x_ij` instrumented
/// by the leave-one-out teacher mean.
pub fn loo_iv(grouped: &GroupedData) -> Result<LinearEstimate> {
    let s = stack(grouped);
    check_first_stage(&s)?;
    let k = s.z.len();
    let p = 2 + k;
    let n = s.y.len();
    let regressor = |i: usize, j: usize| match j {
        0 => 1.0,
        1 => s.x[i],
        _ => s.z[j - 2][i],
    };
    let instrument = |i: usize, j: usize| match j {
        0 => 1.0,
        1 => s.loo[i],
        _ => s.z[j - 2][i],
    };
    let mut a = DMatrix::zeros(p, p);
    let mut b = DVector::zeros(p);
    for i in 0..n {
        for r in 0..p {
            let q = instrument(i, r);
            b[r] += q * s.y[i];
            for c in 0..p {
                a[(r, c)] += q * regressor(i, c);
            }
        }
    }
    let theta = solve_square(a, b)
        .ok_or_else(|| Error::ZeroFirstStage("instrumented normal equations are singular".into()))?;
    from_theta(theta, LinearEstimator::LooIv, k)
}

/// Normal equations of the infeasible student-level regression on
/// `(1, mu_i, z_ij)`, with every moment involving `mu_i` replaced by
/// `sum_j xbar_i v_ij - (N_i - 1)^{-1} sum_j v_ij (x_ij - xbar_i)`.
pub fn debiased_moment(grouped: &GroupedData) -> Result<LinearEstimate> {
    check_first_stage(&stack(grouped))?;
    let k = grouped.covariate_names().len();
    let p = 2 + k;
    let mut a = DMatrix::zeros(p, p);
    let mut b = DVector::zeros(p);
    for g in grouped.groups() {
        let n = g.size();
        let nf = n as f64;
        let xbar = mean(&g.x);
        // sum_j mu v_j, debiased
        let mu_moment = |v: &dyn Fn(usize) -> f64| -> f64 {
            let plain: f64 = (0..n).map(|j| xbar * v(j)).sum();
            let adj: f64 = (0..n).map(|j| v(j) * (g.x[j] - xbar)).sum::<f64>() / (nf - 1.0);
            plain - adj
        };
        let col = |c: usize, j: usize| -> f64 {
            match c {
                0 => 1.0,
                1 => g.x[j],
                _ => g.z[c - 2][j],
            }
        };
        for r in 0..p {
            for c in 0..p {
                a[(r, c)] += match (r, c) {
                    (1, 1) => mu_moment(&|j| g.x[j]),
                    (1, o) | (o, 1) => mu_moment(&|j| col(o, j)),
                    (r, c) => (0..n).map(|j| col(r, j) * col(c, j)).sum::<f64>(),
                };
            }
            b[r] += match r {
                1 => mu_moment(&|j| g.y[j]),
                r => (0..n).map(|j| col(r, j) * g.y[j]).sum::<f64>(),
            };
        }
    }
    let theta = solve_square(a, b)
        .ok_or_else(|| Error::ZeroFirstStage("debiased normal equations are singular".into()))?;
    from_theta(theta, LinearEstimator::DebiasedMoment, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Group;

    fn three_row() -> ObservationSet {
        let s = 0.5f64.sqrt();
        ObservationSet::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0], vec![s, s, s]).unwrap()
    }

    #[test]
    fn classical_on_three_rows() {
        let est = classical_eiv(&sample_moments(&three_row())).unwrap();
        assert!((est.beta - 4.0).abs() < 1e-12);
        assert!((est.meta.naive_slope.unwrap() - 1.0).abs() < 1e-15);
        assert!((est.meta.inflation_factor.unwrap() - 4.0).abs() < 1e-12);
        assert!((est.intercept - (1.0 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn classical_without_noise_is_ols() {
        let m = MomentSummary::from_slices(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0], &[0.0; 3], None).unwrap();
        assert_eq!(classical_eiv(&m).unwrap().beta, 1.0);
    }

    #[test]
    fn classical_boundary_errors() {
        let m = MomentSummary::from_slices(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0], &[2.0 / 3.0; 3], None).unwrap();
        assert!(matches!(
            classical_eiv(&m),
            Err(Error::SignalVarianceNotIdentified { .. })
        ));
    }

    #[test]
    fn prior_on_three_rows() {
        let p = fit_gaussian_prior(&sample_moments(&three_row()));
        assert!((p.variance - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(p.mean, 1.0);
        assert!(!p.floored);

        let m = MomentSummary::from_slices(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0], &[1.0; 3], None).unwrap();
        let p = fit_gaussian_prior(&m);
        assert!(p.floored);
        assert_eq!(p.variance, VARIANCE_FLOOR * m.var_x);

        let m = MomentSummary::from_slices(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0], &[0.0; 3], None).unwrap();
        assert_eq!(fit_gaussian_prior(&m).variance, m.var_x);
    }

    #[test]
    fn outcome_moment_prior() {
        let d = ObservationSet::new(vec![1.0, 3.0, 8.0], vec![0.0, 1.0, 2.0], vec![0.1; 3]).unwrap();
        let m = sample_moments(&d);
        let p = fit_gaussian_prior_with(&m, PriorMoments::Outcome);
        assert_eq!(p.mean, 4.0);
        assert!((p.variance - (m.var_y - 0.01)).abs() < 1e-14);
    }

    #[test]
    fn shrinkage_formula() {
        let p = GaussianPrior::new(0.0, 1.0).unwrap();
        assert_eq!(p.shrink(2.0, 1.0), 1.0);
        assert!((p.shrink(2.0, 1e-12) - 2.0).abs() < 1e-11);
        let p = GaussianPrior::new(1.0, 1.0 / 6.0).unwrap();
        assert!((p.shrink(2.0, 0.5) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn shrinkage_equals_classical_when_homoskedastic() {
        let est = shrinkage_estimate(&three_row(), PriorMoments::Measurement).unwrap();
        assert!((est.beta - 4.0).abs() < 1e-12);
    }

    #[test]
    fn regress_on_shrinkage_edge_cases() {
        let d = three_row();
        assert!(matches!(
            regress_on_shrinkage(&d, &[1.0; 3]),
            Err(Error::DegenerateRegressor(_))
        ));
        let est = regress_on_shrinkage(&d, d.x()).unwrap();
        assert_eq!(est.beta, sample_moments(&d).naive_slope());
    }

    fn weighted_fixture() -> (ObservationSet, Vec<f64>) {
        let d = ObservationSet::new(
            vec![1.0, 2.5, 0.5, 4.0, 3.0],
            vec![0.0, 1.0, -1.0, 3.0, 2.5],
            vec![0.3, 0.5, 0.2, 0.4, 0.1],
        )
        .unwrap();
        (d, vec![1.0, 2.0, 3.0, 1.0, 2.0])
    }

    #[test]
    fn weighted_classical_reductions() {
        let (d, w) = weighted_fixture();
        let unit = weighted_classical_eiv(&d, &[1.0; 5]).unwrap();
        let plain = classical_eiv(&sample_moments(&d)).unwrap();
        assert_eq!(unit.beta, plain.beta);

        let est = weighted_classical_eiv(&d, &w).unwrap();
        let idx: Vec<usize> = w.iter().enumerate().flat_map(|(i, &k)| vec![i; k as usize]).collect();
        let dup = classical_eiv(&sample_moments(&d.select(&idx).unwrap())).unwrap();
        assert!((est.beta - dup.beta).abs() < 1e-12 * dup.beta.abs().max(1.0));
    }

    #[test]
    fn weighted_denominator_must_be_positive() {
        let d = ObservationSet::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0], vec![1.0; 3]).unwrap();
        assert!(weighted_classical_eiv(&d, &[1.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn two_sided_reductions() {
        let (d, w) = weighted_fixture();
        let a = two_sided_corrected(&d, &w, &[0.0; 5]).unwrap();
        let b = weighted_classical_eiv(&d, &w).unwrap();
        assert_eq!(a.beta.to_bits(), b.beta.to_bits());

        // Choose cov12 so the corrected numerator vanishes.
        let m = weighted_moments(&d, &w).unwrap();
        let est = two_sided_corrected(&d, &w, &[m.cov_xy; 5]).unwrap();
        assert!(est.beta.abs() < 1e-14);
    }

    #[test]
    fn cov12_by_hand() {
        let g = GroupedData::new(vec![
            Group::new("a", vec![0.0, 2.0], vec![0.0, 2.0]),
            Group::new("b", vec![1.0, 1.0, 1.0], vec![0.0, 5.0, 2.0]),
        ])
        .unwrap();
        assert_eq!(estimate_cov12(&g), vec![1.0, 0.0]);
    }

    fn small_grouped() -> GroupedData {
        GroupedData::new(vec![
            Group::new("a", vec![1.0, 3.0], vec![0.0, 2.0]),
            Group::new("b", vec![4.0, 2.0], vec![3.0, 5.0]),
        ])
        .unwrap()
    }

    #[test]
    fn loo_iv_two_by_two_by_hand() {
        // Instruments: a -> (2, 0), b -> (5, 3). Regressors x: (0, 2, 3, 5).
        // Just-identified IV slope = cov(q, y) / cov(q, x) with 1/n moments.
        let q = [2.0, 0.0, 5.0, 3.0];
        let x = [0.0, 2.0, 3.0, 5.0];
        let y = [1.0, 3.0, 4.0, 2.0];
        let c = |a: &[f64], b: &[f64]| {
            let ma = a.iter().sum::<f64>() / 4.0;
            let mb = b.iter().sum::<f64>() / 4.0;
            a.iter().zip(b).map(|(u, v)| (u - ma) * (v - mb)).sum::<f64>() / 4.0
        };
        let want = c(&q, &y) / c(&q, &x);
        let got = loo_iv(&small_grouped()).unwrap();
        assert!((got.beta - want).abs() < 1e-12);
        let dm = debiased_moment(&small_grouped()).unwrap();
        assert!((dm.beta - want).abs() < 1e-12);
        assert!((dm.intercept - got.intercept).abs() < 1e-12);
    }

    #[test]
    fn loo_iv_degenerate_instrument_is_ols() {
        // x constant within teacher, so the instrument equals x.
        let g = GroupedData::new(vec![
            Group::new("a", vec![1.0, 3.0, 2.0], vec![1.0; 3]),
            Group::new("b", vec![4.0, 2.0], vec![3.0; 2]),
            Group::new("c", vec![0.0, 1.0], vec![-1.0; 2]),
        ])
        .unwrap();
        let iv = loo_iv(&g).unwrap();
        let s = stack(&g);
        let m = MomentSummary::from_slices(&s.y, &s.x, &vec![0.0; s.y.len()], None).unwrap();
        assert!((iv.beta - m.naive_slope()).abs() < 1e-12);
        let dm = debiased_moment(&g).unwrap();
        assert!((dm.beta - iv.beta).abs() < 1e-12);
    }

    #[test]
    fn zero_first_stage() {
        // Leave-one-out means uncorrelated with x: each group has x = (0, 1) pattern
        // mirrored so the instrument is constant.
        let g = GroupedData::new(vec![
            Group::new("a", vec![1.0, 3.0], vec![1.0, 1.0]),
            Group::new("b", vec![4.0, 2.0], vec![1.0, 1.0]),
        ])
        .unwrap();
        assert!(matches!(loo_iv(&g), Err(Error::ZeroFirstStage(_))));
        assert!(matches!(debiased_moment(&g), Err(Error::ZeroFirstStage(_))));
    }

    #[test]
    fn estimator_names_round_trip() {
        for id in [
            LinearEstimator::Classical,
            LinearEstimator::Shrinkage,
            LinearEstimator::WeightedClassical,
            LinearEstimator::WeightedShrinkage,
            LinearEstimator::TwoSided,
            LinearEstimator::LooIv,
            LinearEstimator::DebiasedMoment,
            LinearEstimator::NaiveOls,
        ] {
            assert_eq!(id.as_str().parse::<LinearEstimator>().unwrap(), id);
        }
    }
}
