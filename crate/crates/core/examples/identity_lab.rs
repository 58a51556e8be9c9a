//! Divergence identities, closed forms and Stokes closure on synthetic fields.

use mkg_lab::identity_lab::{run_lab, LabConfig};

fn main() -> mkg_lab::Result<()> {
    let r = run_lab(&LabConfig::default())?;
    for t in &r.triples {
        println!(
            "{:<18} residuals {:?} orders {:?} stokes {:?} {}",
            t.name,
            t.divergence_residual.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>(),
            t.divergence_orders.iter().map(|o| o.map(|x| (x * 100.0).round() / 100.0)).collect::<Vec<_>>(),
            t.stokes_orders.iter().map(|o| o.map(|x| (x * 100.0).round() / 100.0)).collect::<Vec<_>>(),
            if t.pass { "pass" } else { "FAIL" }
        );
    }
    println!("Bianchi {:.1e}, gauge {:.1e}", r.bianchi_residual, r.gauge_change);
    Ok(())
}
