//! Observed orders of the residuals, charge drift and fluxes over three levels.

use mkg_lab::config::RunConfig;
use mkg_lab::run::convergence;

fn main() -> mkg_lab::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.grid.v_max = 16.0;
    let t = convergence(&cfg, &[512, 1024, 2048])?;
    for r in &t.rows {
        println!("{:<18} {:?} orders {:?}{}", r.quantity, r.values.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>(), r.orders.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>(), if r.monotone { "" } else { " (non-monotone)" });
    }
    Ok(())
}
