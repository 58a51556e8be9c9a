//! Write a state in both checkpoint formats and read it back.

use mkg_lab::config::RunConfig;
use mkg_lab::fields::{read_checkpoint, write_checkpoint, CheckpointFormat};
use mkg_lab::run::evolve_config;

fn main() -> mkg_lab::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.grid.n = 256;
    let ev = evolve_config(&cfg, |_, _| Ok(()))?;
    let dir = std::env::temp_dir();
    for (fmt, name) in [(CheckpointFormat::Binary, "mkg_example.bin"), (CheckpointFormat::Csv, "mkg_example.csv")] {
        let path = dir.join(name);
        write_checkpoint(&path, &ev.grid, &ev.state, ev.q0, fmt)?;
        let (header, _, back) = read_checkpoint(&path)?;
        let same = back.psi == ev.state.psi && back.q == ev.state.q && back.a_u == ev.state.a_u;
        println!("{fmt:?}: {} points, {} bytes, identical: {same}", header.points, std::fs::metadata(&path)?.len());
        std::fs::remove_file(path)?;
    }
    Ok(())
}
