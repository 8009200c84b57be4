//! Nonparametric bootstrap and diagnostics for precision independence.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{GroupedData, ObservationSet};
use crate::error::{Error, Result};
use crate::moments::MomentSummary;
use crate::priors::std_normal_quantile;
use crate::smooth::{local_linear_fit, Bandwidth, PiecewiseLinear};
use crate::streams::{par_map, stream_rng};

/// Data that can be resampled with replacement, one unit at a time.
pub trait Resample: Sized {
    fn units(&self) -> usize;
    fn resample(&self, idx: &[usize]) -> Result<Self>;
}

impl Resample for ObservationSet {
    fn units(&self) -> usize {
        self.n()
    }

    fn resample(&self, idx: &[usize]) -> Result<Self> {
        self.select(idx)
    }
}

/// Teachers are the resampling unit; students stay with their teacher.
impl Resample for GroupedData {
    fn units(&self) -> usize {
        self.n_groups()
    }

    fn resample(&self, idx: &[usize]) -> Result<Self> {
        self.select(idx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub draws: usize,
    pub seed: u64,
    pub level: f64,
    pub threads: usize,
}

impl BootstrapConfig {
    pub fn new(seed: u64) -> Self {
        BootstrapConfig {
            draws: 999,
            seed,
            level: 0.95,
            threads: 1,
        }
    }

    pub fn draws(mut self, b: usize) -> Self {
        self.draws = b;
        self
    }

    pub fn level(mut self, level: f64) -> Self {
        self.level = level;
        self
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.draws < 2 {
            return Err(Error::InvalidInput(format!("bootstrap needs B >= 2, got {}", self.draws)));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidInput(format!("confidence level must lie in (0, 1), got {}", self.level)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub point: f64,
    pub draws: Vec<f64>,
    pub se: f64,
    /// Percentile interval.
    pub ci: Interval,
    /// `point +- z * se`.
    pub normal_ci: Interval,
    pub level: f64,
    pub replications: usize,
    pub failed_draws: usize,
    pub seed: u64,
}

/// Type-7 sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn draw_indices(n: usize, seed: u64, b: usize) -> Vec<usize> {
    let mut rng = stream_rng(seed, b as u64);
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

/// Resamples `data` `config.draws` times and summarizes `estimator` over the draws.
///
/// Draws on which resampling or the estimator fails are counted and dropped;
/// more than half failing is an error.
pub fn bootstrap<D, F>(data: &D, estimator: F, config: &BootstrapConfig) -> Result<BootstrapResult>
where
    D: Resample + Sync,
    F: Fn(&D) -> Result<f64> + Sync + Send,
{
    config.validate()?;
    let point = estimator(data)?;
    let n = data.units();
    let results = par_map(config.threads, config.draws, |b| {
        let idx = draw_indices(n, config.seed, b);
        data.resample(&idx).and_then(|d| estimator(&d)).ok().filter(|v| v.is_finite())
    });
    let draws: Vec<f64> = results.into_iter().flatten().collect();
    let failed = config.draws - draws.len();
    if 2 * failed > config.draws || draws.len() < 2 {
        return Err(Error::BootstrapUnstable {
            failed,
            total: config.draws,
        });
    }
    let se = sd(&draws);
    let mut sorted = draws.clone();
    sorted.sort_by(f64::total_cmp);
    let alpha = 1.0 - config.level;
    let z = std_normal_quantile(1.0 - alpha / 2.0);
    Ok(BootstrapResult {
        point,
        se,
        ci: Interval {
            lower: quantile_sorted(&sorted, alpha / 2.0),
            upper: quantile_sorted(&sorted, 1.0 - alpha / 2.0),
        },
        normal_ci: Interval {
            lower: point - z * se,
            upper: point + z * se,
        },
        draws,
        level: config.level,
        replications: config.draws,
        failed_draws: failed,
        seed: config.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticTest {
    YOnLogSigma,
    XOnLogSigma,
    CondvarConstancy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub test: DiagnosticTest,
    pub coef: f64,
    pub se: f64,
    pub t_stat: f64,
    pub critical_value: f64,
    /// `|t| > critical_value` at the 5% nominal level.
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticConfig {
    pub draws: usize,
    pub seed: u64,
    pub threads: usize,
    pub bandwidth: Bandwidth,
}

impl DiagnosticConfig {
    pub fn new(seed: u64) -> Self {
        DiagnosticConfig {
            draws: 999,
            seed,
            threads: 1,
            bandwidth: Bandwidth::Auto,
        }
    }
}

/// Chance that a dataset satisfying all three null hypotheses gets any flag.
pub const FAMILY_LEVEL: f64 = 0.05;

/// OLS slope of `v` on `log10(sigma)`.
pub fn slope_on_log_sigma(v: &[f64], sigma: &[f64]) -> Result<f64> {
    let ls: Vec<f64> = sigma.iter().map(|s| s.log10()).collect();
    let zeros = vec![0.0; v.len()];
    let m = MomentSummary::from_slices(v, &ls, &zeros, None)?;
    if !(m.var_x > 0.0) {
        return Err(Error::Homoskedastic);
    }
    Ok(m.naive_slope())
}

/// `var(X | sigma) - sigma^2` by local linear regression, as a function of
/// `log10 sigma`. The bandwidth applies on that scale.
///
/// The smoothed response is `(X - m(sigma))^2 - sigma^2`, which is flat when
/// the signal variance does not move with sigma.
pub fn conditional_signal_variance(data: &ObservationSet, bandwidth: Bandwidth) -> Result<PiecewiseLinear> {
    let ls = log_sigma(data.sigma());
    let m = local_linear_fit(&ls, data.x(), bandwidth)?;
    let r: Vec<f64> = data
        .x()
        .iter()
        .zip(data.sigma())
        .zip(&ls)
        .map(|((&x, &s), &l)| (x - m.eval(l)).powi(2) - s * s)
        .collect();
    local_linear_fit(&ls, &r, bandwidth)
}

fn log_sigma(sigma: &[f64]) -> Vec<f64> {
    sigma.iter().map(|s| s.log10()).collect()
}

// the 5%, 5.9%, ..., 95% sample quantiles of log10 sigma
fn central_grid(sigma: &[f64]) -> Vec<f64> {
    let mut s = log_sigma(sigma);
    s.sort_by(f64::total_cmp);
    (0..101).map(|k| quantile_sorted(&s, 0.05 + 0.9 * k as f64 / 100.0)).collect()
}

fn centred(values: &[f64]) -> Vec<f64> {
    let m = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| v - m).collect()
}

struct DrawStats {
    y_slope: f64,
    x_slope: f64,
    range: f64,
    curve: Vec<f64>,
}

fn draw_stats(data: &ObservationSet, grid: &[f64], bandwidth: Bandwidth) -> Result<DrawStats> {
    let curve = conditional_signal_variance(data, bandwidth)?;
    let vals: Vec<f64> = grid.iter().map(|&g| curve.eval(g)).collect();
    let range = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max) - vals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DrawStats {
        y_slope: slope_on_log_sigma(data.y(), data.sigma())?,
        x_slope: slope_on_log_sigma(data.x(), data.sigma())?,
        range,
        curve: centred(&vals),
    })
}

/// Regressions of Y and X on `log10 sigma` and a constancy check on
/// `var(X | sigma) - sigma^2`, all with bootstrap standard errors.
///
/// The constancy check smooths on `log10 sigma` (a fixed bandwidth in
/// `config` is on that scale; `Auto` means twice the rule of thumb, since the
/// squared residuals are skewed) and evaluates the curve at 101 quantiles between
/// the 5th and 95th percentiles, centres it, and divides by pointwise
/// bootstrap standard errors. Its statistic is the largest studentized
/// deviation, compared with the same supremum over recentred draws. `coef`
/// is the range of the curve and `se` the bootstrap sd of that range.
///
/// Each check is run at level `FAMILY_LEVEL / 3`, so a clean dataset is
/// flagged at most about `FAMILY_LEVEL` of the time; `t_stat` can be
/// compared with other critical values by the caller.
pub fn diagnose_precision(data: &ObservationSet, config: &DiagnosticConfig) -> Result<Vec<DiagnosticReport>> {
    let smin = data.sigma().iter().copied().fold(f64::INFINITY, f64::min);
    let smax = data.sigma().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(smax - smin > 1e-12 * smax) {
        return Err(Error::Homoskedastic);
    }
    if config.draws < 2 {
        return Err(Error::InvalidInput("diagnostics need at least 2 bootstrap draws".into()));
    }
    let grid = central_grid(data.sigma());
    // draws reuse the full-sample bandwidth
    let h = match config.bandwidth {
        Bandwidth::Auto => 2.0 * Bandwidth::Auto.resolve(&log_sigma(data.sigma())),
        Bandwidth::Fixed(h) => h,
    };
    let bandwidth = Bandwidth::Fixed(h);
    let full = draw_stats(data, &grid, bandwidth)?;

    let n = data.n();
    let draws: Vec<DrawStats> = par_map(config.threads, config.draws, |b| {
        let idx = draw_indices(n, config.seed, b);
        data.resample(&idx).and_then(|d| draw_stats(&d, &grid, bandwidth)).ok()
    })
    .into_iter()
    .flatten()
    .collect();
    let failed = config.draws - draws.len();
    if 2 * failed > config.draws || draws.len() < 2 {
        return Err(Error::BootstrapUnstable {
            failed,
            total: config.draws,
        });
    }

    // each check at FAMILY_LEVEL / 3
    let alpha = FAMILY_LEVEL / 3.0;
    let z = std_normal_quantile(1.0 - alpha / 2.0);
    let regression = |test, coef: f64, pick: fn(&DrawStats) -> f64| {
        let se = sd(&draws.iter().map(pick).collect::<Vec<_>>());
        let t = coef / se;
        DiagnosticReport {
            test,
            coef,
            se,
            t_stat: t,
            critical_value: z,
            flagged: t.abs() > z,
        }
    };
    let y = regression(DiagnosticTest::YOnLogSigma, full.y_slope, |d| d.y_slope);
    let x = regression(DiagnosticTest::XOnLogSigma, full.x_slope, |d| d.x_slope);

    let pointwise_se: Vec<f64> = (0..grid.len())
        .map(|g| sd(&draws.iter().map(|d| d.curve[g]).collect::<Vec<_>>()).max(f64::MIN_POSITIVE))
        .collect();
    let sup_t = |curve: &[f64], centre: Option<&[f64]>| {
        curve
            .iter()
            .enumerate()
            .map(|(g, v)| (v - centre.map_or(0.0, |c| c[g])).abs() / pointwise_se[g])
            .fold(0.0, f64::max)
    };
    let t = sup_t(&full.curve, None);
    let mut null: Vec<f64> = draws.iter().map(|d| sup_t(&d.curve, Some(&full.curve))).collect();
    null.sort_by(f64::total_cmp);
    let crit = quantile_sorted(&null, 1.0 - alpha);
    let condvar = DiagnosticReport {
        test: DiagnosticTest::CondvarConstancy,
        coef: full.range,
        se: sd(&draws.iter().map(|d| d.range).collect::<Vec<_>>()),
        t_stat: t,
        critical_value: crit,
        flagged: t > crit,
    };
    Ok(vec![y, x, condvar])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Group;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_data(n: usize, seed: u64) -> ObservationSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
        let y: Vec<f64> = (0..n).map(|_| draw()).collect();
        let x: Vec<f64> = (0..n).map(|_| draw()).collect();
        let s: Vec<f64> = (0..n).map(|_| 0.5 + 0.1 * draw().abs()).collect();
        ObservationSet::new(y, x, s).unwrap()
    }

    fn mean_y(d: &ObservationSet) -> Result<f64> {
        Ok(d.y().iter().sum::<f64>() / d.n() as f64)
    }

    #[test]
    fn quantiles_type_seven() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert!((quantile_sorted(&v, 0.25) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn deterministic_given_seed() {
        let d = normal_data(200, 1);
        let cfg = BootstrapConfig::new(42).draws(999);
        let a = bootstrap(&d, mean_y, &cfg).unwrap();
        let b = bootstrap(&d, mean_y, &cfg).unwrap();
        assert_eq!(a, b);
        let c = bootstrap(&d, mean_y, &cfg.threads(3)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn mean_se_matches_analytic() {
        let d = normal_data(4000, 2);
        let r = bootstrap(&d, mean_y, &BootstrapConfig::new(9).draws(999)).unwrap();
        let analytic = sd(d.y()) / (d.n() as f64).sqrt();
        assert!((r.se / analytic - 1.0).abs() < 0.2, "{} vs {analytic}", r.se);
        assert!(r.ci.lower < r.point && r.point < r.ci.upper);
    }

    #[test]
    fn failures_are_counted() {
        use crate::linear::classical_eiv;
        use crate::moments::sample_moments;
        // signal variance about 8% of var(X): some resamples lose it
        let d = normal_data(200, 3);
        let var_x = sample_moments(&d).var_x;
        let s = (0.92 * var_x).sqrt();
        let d = ObservationSet::new(d.y().to_vec(), d.x().to_vec(), vec![s; 200]).unwrap();
        let est = |d: &ObservationSet| classical_eiv(&sample_moments(d)).map(|e| e.beta);
        let r = bootstrap(&d, est, &BootstrapConfig::new(1).draws(400)).unwrap();
        assert!(r.failed_draws > 0);
        assert_eq!(r.draws.len() + r.failed_draws, 400);
    }

    #[test]
    fn unstable_when_most_fail() {
        let d = normal_data(30, 4);
        let bad = |_: &ObservationSet| -> Result<f64> { Err(Error::DegenerateRegressor("x".into())) };
        let first_ok = |s: &ObservationSet| if s.y() == d.y() { mean_y(s) } else { bad(s) };
        assert!(matches!(
            bootstrap(&d, first_ok, &BootstrapConfig::new(1).draws(20)),
            Err(Error::BootstrapUnstable { failed: 20, total: 20 })
        ));
    }

    #[test]
    fn grouped_resampling_keeps_whole_groups() {
        let g = GroupedData::new(vec![
            Group::new("a", vec![1.0, 2.0], vec![0.0, 1.0]),
            Group::new("b", vec![3.0, 4.0, 5.0], vec![2.0, 3.0, 4.0]),
            Group::new("c", vec![6.0, 7.0], vec![5.0, 6.0]),
        ])
        .unwrap();
        for b in 0..20 {
            let idx = draw_indices(g.units(), 5, b);
            let r = g.resample(&idx).unwrap();
            for grp in r.groups() {
                let orig = g.groups().iter().find(|o| o.id == grp.id).unwrap();
                assert_eq!(grp.y, orig.y);
                assert_eq!(grp.x, orig.x);
            }
        }
    }

    #[test]
    fn homoskedastic_diagnostics_error() {
        let d = ObservationSet::new((0..30).map(f64::from).collect(), (0..30).map(f64::from).collect(), vec![0.3; 30]).unwrap();
        assert!(matches!(diagnose_precision(&d, &DiagnosticConfig::new(1)), Err(Error::Homoskedastic)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn percentile_ci_contains_median(seed in 0u64..1000, b in 5usize..60) {
            let d = normal_data(40, seed);
            let r = bootstrap(&d, mean_y, &BootstrapConfig::new(seed).draws(b)).unwrap();
            let mut s = r.draws.clone();
            s.sort_by(f64::total_cmp);
            let med = quantile_sorted(&s, 0.5);
            prop_assert!(r.ci.contains(med));
            prop_assert!(r.ci.lower <= r.ci.upper);
            prop_assert!(r.se >= 0.0);
        }
    }
}
