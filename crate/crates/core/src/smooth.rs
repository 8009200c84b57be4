//! Local linear smoothing and the piecewise-linear functions it produces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of evaluation points used by [`local_linear_fit`].
pub const GRID_POINTS: usize = 101;

/// Smallest sample accepted by [`local_linear_fit`].
pub const MIN_POINTS: usize = 20;

/// A function given by knots, linear in between and flat outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::InvalidInput(
                "piecewise-linear function needs equally many x and y knots, at least one".into(),
            ));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("piecewise-linear knots must be finite".into()));
        }
        if x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("piecewise-linear knots must be strictly increasing".into()));
        }
        Ok(PiecewiseLinear { x, y })
    }

    pub fn constant(value: f64) -> Self {
        PiecewiseLinear {
            x: vec![0.0],
            y: vec![value],
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let k = self.x.partition_point(|&v| v <= t);
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        let (y0, y1) = (self.y[k - 1], self.y[k]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    pub fn min_value(&self) -> f64 {
        self.y.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.y.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same knots, values mapped through `f`.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> PiecewiseLinear {
        PiecewiseLinear {
            x: self.x.clone(),
            y: self.x.iter().zip(&self.y).map(|(&x, &y)| f(x, y)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// `1.06 * sd(x) * n^(-1/5)`.
    #[default]
    Auto,
    Fixed(f64),
}

impl Bandwidth {
    pub fn resolve(&self, x: &[f64]) -> f64 {
        match *self {
            Bandwidth::Fixed(h) => h,
            Bandwidth::Auto => {
                let n = x.len() as f64;
                let m = x.iter().sum::<f64>() / n;
                let sd = (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)).sqrt();
                1.06 * sd * n.powf(-0.2)
            }
        }
    }
}

fn epanechnikov(u: f64) -> f64 {
    if u.abs() < 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

/// Local linear regression of `y` on `x` with an Epanechnikov kernel,
/// evaluated at 101 equispaced points over `[min x, max x]`.
///
/// Where a window holds fewer than [`MIN_POINTS`] points, or too few distinct
/// ones for a line, the bandwidth at that grid point is widened by half until
/// it does.
pub fn local_linear_fit(x: &[f64], y: &[f64], bandwidth: Bandwidth) -> Result<PiecewiseLinear> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("x and y differ in length".into()));
    }
    if x.len() < MIN_POINTS {
        return Err(Error::InvalidInput(format!(
            "local linear fit needs at least {MIN_POINTS} points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("local linear fit needs finite data".into()));
    }
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lo = pairs[0].0;
    let hi = pairs[pairs.len() - 1].0;
    if !(hi > lo) {
        return Err(Error::DegenerateRegressor("x has no dispersion".into()));
    }
    let h0 = bandwidth.resolve(x);
    if !(h0 > 0.0) || !h0.is_finite() {
        return Err(Error::InvalidInput(format!("bandwidth must be positive, got {h0}")));
    }

    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|k| if k == GRID_POINTS - 1 { hi } else { lo + step * k as f64 })
        .collect();
    let values = grid
        .iter()
        .map(|&g| {
            let mut h = h0;
            loop {
                if let Some(v) = local_fit_at(&pairs, g, h) {
                    return v;
                }
                h *= 1.5;
            }
        })
        .collect();
    PiecewiseLinear::new(grid, values)
}

fn local_fit_at(pairs: &[(f64, f64)], g: f64, h: f64) -> Option<f64> {
    let start = pairs.partition_point(|p| p.0 <= g - h);
    let end = pairs.partition_point(|p| p.0 < g + h);
    let window = &pairs[start..end];
    if window.len() < MIN_POINTS || window[0].0 == window[window.len() - 1].0 {
        return None;
    }
    let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(xi, yi) in window {
        let d = xi - g;
        let w = epanechnikov(d / h);
        s0 += w;
        s1 += w * d;
        s2 += w * d * d;
        t0 += w * yi;
        t1 += w * d * yi;
    }
    let det = s0 * s2 - s1 * s1;
    if !(det > 1e-12 * s0 * s2) {
        return None;
    }
    Some((s2 * t0 - s1 * t1) / det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eval_interpolates_and_extrapolates_flat() {
        let f = PiecewiseLinear::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(f.eval(-5.0), 0.0);
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(2.0), 1.0);
        assert_eq!(f.eval(9.0), 0.0);
        assert_eq!(f.eval(1.0), 2.0);
        assert!(PiecewiseLinear::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn reproduces_lines() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..200).map(|_| rng.gen_range(-3.0..5.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        for bw in [Bandwidth::Auto, Bandwidth::Fixed(0.05), Bandwidth::Fixed(100.0)] {
            let f = local_linear_fit(&x, &y, bw).unwrap();
            for (&g, &v) in f.knots().iter().zip(f.values()) {
                assert!((v - (2.0 * g + 1.0)).abs() < 1e-8, "{bw:?} at {g}: {v}");
            }
        }
    }

    #[test]
    fn square_on_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let f = local_linear_fit(&x, &y, Bandwidth::Auto).unwrap();
        // dense evaluation against the truth
        let worst = (0..=1000)
            .map(|k| {
                let t = f.knots()[0] + (f.knots()[100] - f.knots()[0]) * k as f64 / 1000.0;
                (f.eval(t) - t * t).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 0.02, "{worst}");
    }

    #[test]
    fn constant_response() {
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let f = local_linear_fit(&x, &[3.5; 30], Bandwidth::Auto).unwrap();
        assert!(f.values().iter().all(|v| (v - 3.5).abs() < 1e-12));
    }

    #[test]
    fn rejects_small_or_flat_input() {
        let x: Vec<f64> = (0..19).map(|i| i as f64).collect();
        assert!(local_linear_fit(&x, &x, Bandwidth::Auto).is_err());
        assert!(local_linear_fit(&[1.0; 25], &[0.0; 25], Bandwidth::Auto).is_err());
    }
}
