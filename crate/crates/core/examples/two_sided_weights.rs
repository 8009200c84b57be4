//! Weighted regression of teacher mean outcomes on teacher mean x when both
//! are averages over the same students, so their noises are correlated.

use latentreg::linear::estimate_cov12;
use latentreg::{aggregate, two_sided_corrected, weighted_classical_eiv, Group, GroupedData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> latentreg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut groups = Vec::new();
    for t in 0..800 {
        let size = rng.gen_range(3..25);
        let mu: f64 = rng.sample(StandardNormal);
        let (mut y, mut x) = (vec![], vec![]);
        for _ in 0..size {
            let shared: f64 = rng.sample(StandardNormal);
            let own: f64 = rng.sample(StandardNormal);
            x.push(mu + shared);
            y.push(0.5 * mu + 0.8 * shared + own);
        }
        groups.push(Group::new(format!("t{t}"), y, x));
    }
    let data = GroupedData::new(groups)?;
    let units = aggregate(&data)?;
    let weights: Vec<f64> = data.groups().iter().map(|g| g.size() as f64).collect();
    let cov12 = estimate_cov12(&data);
    println!("true slope            0.500");
    println!("weighted classical    {:.3}", weighted_classical_eiv(&units, &weights)?.beta);
    println!("two-sided corrected   {:.3}", two_sided_corrected(&units, &weights, &cov12)?.beta);
    Ok(())
}
