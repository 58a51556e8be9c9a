//! March the default charged bump and print the energy flux of a few leaves.
//!
//! ```text
//! cargo run --release --example evolve_bump
//! ```

use mkg_lab::config::RunConfig;
use mkg_lab::diagnostics::flux_report;
use mkg_lab::run::evolve_config;

fn main() -> mkg_lab::Result<()> {
    let cfg = RunConfig::default();
    let ev = evolve_config(&cfg, |_, _| Ok(()))?;
    println!("grid: v_max = {}, N = {}, h = {}", ev.grid.v_max(), ev.grid.n(), ev.grid.h());
    println!("total charge q0 = {:.6}", ev.q0);
    let taus = ev.grid.lattice_taus(0.0, 40.0, 5.0);
    let report = flux_report(&ev.grid, &ev.state, ev.q0, &taus, &cfg.physics.p_list)?;
    println!("{:>6} {:>14} {:>14} {:>10}", "tau", "E", "W_1", "q(v_max)");
    for l in &report.leaves {
        println!("{:>6.1} {:>14.6e} {:>14.6e} {:>10.4}", l.tau, l.e_flux_charged, l.w[2], l.charge);
    }
    Ok(())
}
