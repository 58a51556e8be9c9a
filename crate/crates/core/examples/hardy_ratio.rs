//! Hardy ratio `∫|φ/(1+r)|² / E[φ]` per leaf, raw and with the cut tail completed.

use mkg_lab::config::RunConfig;
use mkg_lab::run::{diagnose, evolve_config};

fn main() -> mkg_lab::Result<()> {
    let cfg = RunConfig::default();
    let ev = evolve_config(&cfg, |_, _| Ok(()))?;
    let d = diagnose(&cfg, &ev)?;
    for l in d.report.leaves.iter().filter(|l| l.tau >= 0.0).step_by(10) {
        println!("tau {:>5.1}: raw {:>9.3}  completed {:>6.3}", l.tau, l.hardy_ratio, l.hardy_ratio_completed);
    }
    println!("violations of the constant 12: {}", d.summary.hardy_violations);
    Ok(())
}
