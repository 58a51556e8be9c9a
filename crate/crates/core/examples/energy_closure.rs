//! Integrated energy identities on an evolved state: bulk against boundary
//! for `∂_t` on a slab and for `r L` on the cone part of it.

use mkg_lab::config::RunConfig;
use mkg_lab::identity_lab::{lifted_closure, Triple};
use mkg_lab::run::evolve_config;

fn main() -> mkg_lab::Result<()> {
    for n in [1024, 2048, 4096] {
        let mut cfg = RunConfig::default();
        cfg.grid.v_max = 16.0;
        cfg.grid.n = n;
        let ev = evolve_config(&cfg, |_, _| Ok(()))?;
        let t = lifted_closure(&ev.grid, &ev.state, &Triple::Time, 0.0, 10.0)?;
        let p = lifted_closure(&ev.grid, &ev.state, &Triple::Rp { p: 1.0 }, 0.0, 10.0)?;
        println!("N = {n:>5}: time residual {:>10.3e}  r^1 L residual {:>10.3e} (bulk {:.3})", t.residual, p.residual, p.bulk);
    }
    Ok(())
}
