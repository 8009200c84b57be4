//! Student-level data grouped by teacher. The leave-one-out instrument and the
//! debiased moment agree when covariates are constant within teacher.

use latentreg::{aggregate, classical_eiv, debiased_moment, loo_iv, sample_moments, Group, GroupedData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> latentreg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut groups = Vec::new();
    for t in 0..400 {
        let size = rng.gen_range(5..30);
        let mu: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        let x: Vec<f64> = (0..size).map(|_| mu + 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        let y: Vec<f64> = (0..size)
            .map(|_| 0.6 * mu + 0.3 * z + rng.sample::<f64, _>(StandardNormal))
            .collect();
        groups.push(Group::new(format!("teacher{t}"), y, x).with_covariates(vec![vec![z; size]]));
    }
    let data = GroupedData::new(groups)?;
    let iv = loo_iv(&data)?;
    let dm = debiased_moment(&data)?;
    println!("leave-one-out IV   beta {:.6}  z {:.6}", iv.beta, iv.covariate_coefs.as_ref().unwrap()[0]);
    println!("debiased moment    beta {:.6}  z {:.6}", dm.beta, dm.covariate_coefs.as_ref().unwrap()[0]);

    // teacher means with estimated standard errors, ignoring z
    let units = aggregate(&data)?;
    println!("teacher-level classical (no covariate) {:.3}", classical_eiv(&sample_moments(&units))?.beta);
    Ok(())
}
