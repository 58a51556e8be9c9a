//! Decay of the energy flux and the r-weighted hierarchy on a long run.
//!
//! Takes about ten seconds in release mode.

use mkg_lab::config::RunConfig;
use mkg_lab::run::{diagnose, evolve_config};

fn main() -> mkg_lab::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.grid.v_max = 128.0;
    cfg.grid.n = 4096;
    let ev = evolve_config(&cfg, |_, _| Ok(()))?;
    let s = diagnose(&cfg, &ev)?.summary;
    println!("gamma = {}, window = {:?}", cfg.physics.gamma, cfg.diagnostics.fit_window);
    for f in &s.fits {
        println!(
            "{:<16} slope {:>7.3}  sup Q(1+tau)^{:.1} / start = {:.3}",
            f.quantity, f.slope, -f.exponent, f.ratio
        );
    }
    Ok(())
}
