//! Vacuum plus a point charge: the scheme keeps `q = q₀`, `ψ = 0` exactly.
//!
//! Rows are stopped short of the axis, where the point charge is singular.

use mkg_lab::config::{DataSource, RunConfig};
use mkg_lab::diagnostics::cone_energy_flux;
use mkg_lab::initdata::Coulomb;
use mkg_lab::run::evolve_config;

fn main() -> mkg_lab::Result<()> {
    let q0 = -4.0;
    let mut cfg = RunConfig { data: DataSource::Coulomb(Coulomb { q0 }), ..RunConfig::default() };
    cfg.grid.v_max = 16.0;
    cfg.grid.n = 512;
    cfg.evolve.row_limit = Some(200);
    let ev = evolve_config(&cfg, |_, _| Ok(()))?;
    let g = &ev.grid;
    let mut drift = 0.0f64;
    for a in 0..=ev.last_row {
        for b in g.row_start(a)..=g.n() {
            drift = drift.max((ev.state.q[g.idx(a, b)] - q0).abs());
        }
    }
    println!("max |q - q0| over marched rows: {drift:e}");
    let leaf = g.leaf(-6.0)?;
    let raw = cone_energy_flux(g, &ev.state, &leaf, q0, false).value;
    let (r1, r2) = (leaf.r1, leaf.truncation_radius);
    let exact = 4.0 * std::f64::consts::PI * q0 * q0 * (1.0 / r1 - 1.0 / r2);
    println!("raw flux on r1 = {r1}: {raw:.10} (closed form {exact:.10})");
    println!("chargeless flux: {:e}", cone_energy_flux(g, &ev.state, &leaf, q0, true).value);
    Ok(())
}
