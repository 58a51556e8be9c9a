//! The charge's long-range tail: exterior cone fluxes with and without the
//! Coulomb part, weighted by `r₁^{1+γ₀}`.

use mkg_lab::config::RunConfig;
use mkg_lab::run::{diagnose, evolve_config};

fn main() -> mkg_lab::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.grid.v_max = 64.0;
    cfg.grid.n = 2048;
    let ev = evolve_config(&cfg, |_, _| Ok(()))?;
    let d = diagnose(&cfg, &ev)?;
    let e = 1.0 + cfg.physics.gamma0;
    println!("{:>7} {:>14} {:>14}", "r1", "r1^e E~", "r1^e E");
    for l in d.report.leaves.iter().filter(|l| l.tau <= 0.0 && l.r1 <= 10.0) {
        println!("{:>7.1} {:>14.6} {:>14.6}", l.r1, l.r1.powf(e) * l.e_cone_chargeless, l.r1.powf(e) * l.e_cone_charged);
    }
    let x = d.summary.exterior.expect("exterior leaves requested");
    println!("sup / value at R: chargeless {:.2}, raw {:.2}", x.chargeless_ratio, x.raw_ratio);
    Ok(())
}
