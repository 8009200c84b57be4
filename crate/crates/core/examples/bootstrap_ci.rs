//! Percentile bootstrap interval for the classical slope, run on four threads.
//! The draws do not depend on the thread count.

use latentreg::{bootstrap, classical_eiv, sample_moments, BootstrapConfig, ObservationSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> latentreg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut y, mut x, mut sigma) = (vec![], vec![], vec![]);
    for _ in 0..2000 {
        let mu: f64 = rng.sample(StandardNormal);
        let s = rng.gen_range(0.1..0.6);
        y.push(0.8 * mu + 0.5 * rng.sample::<f64, _>(StandardNormal));
        x.push(mu + s * rng.sample::<f64, _>(StandardNormal));
        sigma.push(s);
    }
    let data = ObservationSet::new(y, x, sigma)?;
    let slope = |d: &ObservationSet| Ok(classical_eiv(&sample_moments(d))?.beta);
    let config = BootstrapConfig::new(42).draws(999).threads(4);
    let b = bootstrap(&data, slope, &config)?;
    let single = bootstrap(&data, slope, &config.threads(1))?;
    assert_eq!(b.draws, single.draws);
    println!("estimate {:.4}  se {:.4}", b.point, b.se);
    println!("95% percentile interval [{:.4}, {:.4}]", b.ci.lower, b.ci.upper);
    println!("95% normal interval     [{:.4}, {:.4}]", b.normal_ci.lower, b.normal_ci.upper);
    Ok(())
}
