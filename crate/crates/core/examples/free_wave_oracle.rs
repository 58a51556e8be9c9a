//! The free wave `ψ = g(v) - g(u)` against the evolved one.
//!
//! The diamond update is exact for free waves, so the whole error comes from
//! the startup rows: second order with the Taylor startup, fourth with d'Alembert.

use mkg_lab::config::{DataSource, RunConfig};
use mkg_lab::evolve::Startup;
use mkg_lab::initdata::FreeWave;
use mkg_lab::run::evolve_config;

fn max_error(n: usize, startup: Startup) -> mkg_lab::Result<f64> {
    let fw = FreeWave::default();
    let mut cfg = RunConfig { data: DataSource::FreeWave(fw), ..RunConfig::default() };
    cfg.grid.v_max = 16.0;
    cfg.grid.n = n;
    cfg.evolve.startup = startup;
    let ev = evolve_config(&cfg, |_, _| Ok(()))?;
    let g = &ev.grid;
    let mut err = 0.0f64;
    for a in 0..=g.n() {
        for b in g.row_start(a)..=g.n() {
            err = err.max((ev.state.psi[g.idx(a, b)] - fw.psi(g.u(a), g.v(b))).norm());
        }
    }
    Ok(err)
}

fn main() -> mkg_lab::Result<()> {
    for startup in [Startup::Taylor2, Startup::DAlembert] {
        let e: Vec<f64> = [256, 512, 1024].into_iter().map(|n| max_error(n, startup)).collect::<Result<_, _>>()?;
        println!(
            "{startup:?}: errors {:.3e} {:.3e} {:.3e}, orders {:.2} {:.2}",
            e[0],
            e[1],
            e[2],
            (e[0] / e[1]).log2(),
            (e[1] / e[2]).log2()
        );
    }
    Ok(())
}
