//! When the signal mean moves with precision and sigma also enters the outcome,
//! regressing on linear shrinkage estimates is biased while the classical
//! correction is not.

use latentreg::simulation::{linear_grid, reference_design, simulate_linear};
use latentreg::{classical_eiv, sample_moments, shrinkage_estimate, PriorMoments};

fn main() -> latentreg::Result<()> {
    let cell = &linear_grid(&reference_design(), &[0.2], &[0.05], 1.0)?[0];
    let reps = 200;
    let (mut classical, mut shrunk, mut truth) = (0.0, 0.0, 0.0);
    for rep in 0..reps {
        let draw = simulate_linear(&cell.spec, 10_058, rep)?;
        truth = draw.truth;
        classical += classical_eiv(&sample_moments(&draw.data))?.beta / reps as f64;
        shrunk += shrinkage_estimate(&draw.data, PriorMoments::Measurement)?.beta / reps as f64;
    }
    println!("true beta                  {truth:.4}");
    println!("mean classical estimate    {classical:.4}");
    println!("mean shrinkage estimate    {shrunk:.4}");
    Ok(())
}
