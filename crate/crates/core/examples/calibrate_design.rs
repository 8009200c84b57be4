//! Fits a simulation design to observed (x, sigma) pairs and draws a new
//! dataset from it.

use latentreg::simulation::{calibrate_dgp, linear_grid, reference_design, simulate_linear};
use latentreg::{Bandwidth, ObservationSet};

fn main() -> latentreg::Result<()> {
    // stand-in for real data
    let observed = simulate_linear(&linear_grid(&reference_design(), &[0.2], &[0.0], 1.0)?[0].spec, 5000, 1)?;
    let data: &ObservationSet = &observed.data;

    let spec = calibrate_dgp(data, Bandwidth::Auto)?;
    let info = spec.calibration.as_ref().unwrap();
    println!("clamped share of the variance grid: {:.2}", info.clamped_fraction);
    let p = spec.population();
    println!("signal mean {:.4}, signal sd {:.4}", p.mean_mu, p.var_mu.sqrt());
    for g in spec.cond_mean.knots().iter().step_by(25) {
        println!(
            "sigma {:.4}: m {:+.4}  s {:.4}",
            g,
            spec.cond_mean.eval(*g),
            spec.cond_var.eval(*g).sqrt()
        );
    }

    let cell = &linear_grid(&spec, &[0.2], &[0.05], 1.0)?[0];
    let fresh = simulate_linear(&cell.spec, 5000, 2)?;
    println!("true beta of the calibrated cell {:.4}", fresh.truth);
    println!("design JSON is {} bytes", cell.spec.to_json().len());
    Ok(())
}
