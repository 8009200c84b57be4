//! Effect of being above the 75th percentile of the latent distribution,
//! estimated with the true prior, a fitted NPMLE prior, and by plugging in the
//! true prior's shrinkage estimates without the indicator's posterior.

use latentreg::simulation::{nonlinear_grid, reference_nonlinear_design, simulate_nonlinear};
use latentreg::{npeb_tau, oracle_tau, plugin_tau, NpmleConfig, Prior};

fn main() -> latentreg::Result<()> {
    let cells = nonlinear_grid(&reference_nonlinear_design(), &[1.0], &[0.75], 1.0)?;
    let draw = simulate_nonlinear(&cells[0].spec, 10_058, 21)?;
    let prior = Prior::Gaussian(draw.prior.unwrap());
    let f = draw.transform.unwrap();
    println!("transform {}", f.label());
    println!("true tau  {:.4}", draw.truth);
    println!("oracle    {:.4}", oracle_tau(&draw.data, &prior, &f)?.tau);
    println!("npeb      {:.4}", npeb_tau(&draw.data, &f, &NpmleConfig::default())?.tau);
    println!("plug-in   {:.4}", plugin_tau(&draw.data, &prior, &f)?.tau);
    Ok(())
}
