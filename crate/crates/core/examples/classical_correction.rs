//! Regressing y on a noisy estimate x of mu attenuates the slope. The
//! classical correction divides by var(x) - mean(sigma^2) instead.

use latentreg::linear::naive_ols;
use latentreg::{classical_eiv, sample_moments, ObservationSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> latentreg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 5000;
    let (mut y, mut x, mut sigma) = (vec![], vec![], vec![]);
    for _ in 0..n {
        let mu: f64 = rng.sample(StandardNormal);
        let s = rng.gen_range(0.3..1.2);
        let e: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.sample(StandardNormal);
        y.push(2.0 * mu + 0.5 * e);
        x.push(mu + s * u);
        sigma.push(s);
    }
    let data = ObservationSet::new(y, x, sigma)?;
    let m = sample_moments(&data);
    println!("true slope       2.000");
    println!("naive OLS        {:.3}", naive_ols(&m)?.beta);
    println!("classical EIV    {:.3}", classical_eiv(&m)?.beta);
    Ok(())
}
