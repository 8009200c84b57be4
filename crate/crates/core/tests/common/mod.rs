#![allow(dead_code)]

use latentreg::{Group, GroupedData, ObservationSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample mean and standard error of the mean.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let m = mean(v);
    let var = v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (m, (var / v.len() as f64).sqrt())
}

/// Heteroskedastic data: y = beta mu + e, x = mu + sigma eps.
pub fn hetero(seed: u64, n: usize, beta: f64) -> ObservationSet {
    let mut r = rng(seed);
    let (mut y, mut x, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        let sigma = r.gen_range(0.1..0.6);
        let mu = normal(&mut r);
        y.push(beta * mu + 0.5 * normal(&mut r));
        x.push(mu + sigma * normal(&mut r));
        s.push(sigma);
    }
    ObservationSet::new(y, x, s).unwrap()
}

/// Teachers with 2..=max_size students. `k` teacher-level covariates;
/// `within` adds one covariate that varies within teacher.
pub fn grouped(seed: u64, teachers: usize, max_size: usize, k: usize, within: bool) -> GroupedData {
    let mut r = rng(seed);
    let groups = (0..teachers)
        .map(|t| {
            let size = r.gen_range(2..=max_size);
            let mu = normal(&mut r);
            let zt: Vec<f64> = (0..k).map(|_| normal(&mut r)).collect();
            let mut z: Vec<Vec<f64>> = zt.iter().map(|&v| vec![v; size]).collect();
            if within {
                z.push((0..size).map(|_| normal(&mut r)).collect());
            }
            let x: Vec<f64> = (0..size).map(|_| mu + 0.3 * zt.iter().sum::<f64>() + normal(&mut r)).collect();
            let y: Vec<f64> = (0..size)
                .map(|j| 0.7 * mu + z.iter().map(|c| 0.2 * c[j]).sum::<f64>() + normal(&mut r))
                .collect();
            Group::new(format!("t{t}"), y, x).with_covariates(z)
        })
        .collect();
    GroupedData::new(groups).unwrap()
}
