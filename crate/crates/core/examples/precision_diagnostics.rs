//! Checks whether the signal or the outcome varies with precision. The second
//! dataset lets the outcome load on log sigma and should be flagged.

use latentreg::{diagnose_precision, DiagnosticConfig, ObservationSet};
use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn dataset(outcome_on_sigma: f64) -> latentreg::Result<ObservationSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut y, mut x, mut sigma) = (vec![], vec![], vec![]);
    for _ in 0..3000 {
        let s: f64 = 10f64.powf(-1.0 + 0.3 * rng.sample::<f64, _>(StandardNormal));
        let mu: f64 = rng.sample(StandardNormal);
        y.push(0.5 * mu + outcome_on_sigma * s.log10() + 0.5 * rng.sample::<f64, _>(StandardNormal));
        x.push(mu + s * rng.sample::<f64, _>(StandardNormal));
        sigma.push(s);
    }
    ObservationSet::new(y, x, sigma)
}

fn main() -> latentreg::Result<()> {
    let config = DiagnosticConfig::new(1);
    for (label, b) in [("clean", 0.0), ("outcome depends on sigma", 1.0)] {
        println!("{label}:");
        for r in diagnose_precision(&dataset(b)?, &config)? {
            println!(
                "  {:?}: coef {:+.4} se {:.4} stat {:+.2} critical {:.2} flagged {}",
                r.test, r.coef, r.se, r.t_stat, r.critical_value, r.flagged
            );
        }
    }
    Ok(())
}
