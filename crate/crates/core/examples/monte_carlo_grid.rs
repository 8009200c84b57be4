//! Bias and MSE of the classical and shrinkage estimators over a small grid of
//! designs, written as CSV to stdout.

use latentreg::simulation::{linear_grid, reference_design, Builtin, McEstimator, LINEAR_COORDS};
use latentreg::{run_monte_carlo, McConfig};

fn main() -> latentreg::Result<()> {
    let cells = linear_grid(&reference_design(), &[0.1, 0.2], &[0.0, 0.05, 0.1], 1.0)?;
    let estimators: Vec<&dyn McEstimator> = vec![&Builtin::Classical, &Builtin::Shrinkage];
    let config = McConfig {
        threads: 0,
        ..McConfig::new(200, 2024)
    };
    let run = run_monte_carlo(&cells, LINEAR_COORDS, &estimators, &config)?;
    for cell in &run.summary.cells {
        println!(
            "beta_mu {:.2} beta_sigma {:.2}: log MSE ratio {:+.2}",
            cell.coords.0,
            cell.coords.1,
            cell.log_mse_ratio("shrinkage", "classical").unwrap()
        );
    }
    run.summary.write_csv(std::io::stdout())?;
    Ok(())
}
