//! Recovers a two-point latent distribution from noisy measurements.

use latentreg::{fit_npmle, NpmleConfig, ObservationSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> latentreg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 5000;
    let x: Vec<f64> = (0..n)
        .map(|_| {
            let mu = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            mu + 0.3 * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    let data = ObservationSet::new(vec![0.0; n], x, vec![0.3; n])?;
    let fit = fit_npmle(&data, &NpmleConfig::default())?;
    println!(
        "{} iterations, converged {}, log-likelihood {:.3}",
        fit.iterations, fit.converged, fit.log_likelihood
    );
    println!("mean {:.4}  variance {:.4}", fit.prior.mean(), fit.prior.variance());
    println!("atoms holding more than 1% of the mass:");
    for (s, m) in fit.prior.support().iter().zip(fit.prior.mass()) {
        if *m > 0.01 {
            println!("  {s:+.3}  {m:.3}");
        }
    }
    Ok(())
}
