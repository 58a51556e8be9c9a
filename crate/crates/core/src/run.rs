//! Run orchestration: the six commands behind `mkg`, their outputs and manifests.
//!
//! Every command writes into one directory and finishes with `manifest.json`,
//! which lists each output with its SHA-256. Outputs other than the manifest
//! depend only on the config, so two runs of the same config agree byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{DataSource, RunConfig};
use crate::diagnostics::{
    charge_series, exterior_bound, fit_decay, flux_report, max_energy_increase, ChargeSeries, DecayFit, ExteriorBound,
    FluxReport, Table, HARDY_CONSTANT,
};
use crate::error::{constraint, range, Error, Result};
use crate::evolve::{covariant_residual, march_with, residual_log, startup, write_residual_log, CovariantResidual};
use crate::fields::{gauge_transform, read_checkpoint, write_checkpoint, FieldState, GaugeMap, CONVENTIONS_VERSION};
use crate::identity_lab::{lifted_closure, run_lab, LabConfig, LabReport, Triple};
use crate::nullgrid::{GridSpec, NullGrid};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the root for relative output directories.
pub const OUTPUT_ROOT_VAR: &str = "MKG_OUTPUT_ROOT";

/// `dir` itself when absolute, else `$MKG_OUTPUT_ROOT/dir` (or `./dir`).
pub fn resolve_output_dir(dir: &str) -> PathBuf {
    let p = PathBuf::from(dir);
    if p.is_absolute() {
        return p;
    }
    match std::env::var_os(OUTPUT_ROOT_VAR) {
        Some(root) => PathBuf::from(root).join(p),
        None => p,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory for outputs; as given for inputs.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn hash_file(path: &Path, name: &str) -> Result<FileEntry> {
    let data = std::fs::read(path)?;
    Ok(FileEntry { path: name.to_string(), sha256: hex::encode(Sha256::digest(&data)), bytes: data.len() as u64 })
}

/// Effect of cutting the domain at `v = v_max` on the decay statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationRecord {
    pub v_max: f64,
    /// Radius where `Σ_0` is cut.
    pub radius_at_tau0: f64,
    pub sensitivity: Option<TruncationSensitivity>,
}

/// Statistics of a run against the same run on a domain twice as large at equal `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSensitivity {
    pub v_max_doubled: f64,
    pub n_doubled: usize,
    /// `(name, base, doubled, |doubled - base| / |base|)`.
    pub statistics: Vec<(String, f64, f64, f64)>,
    pub max_relative_change: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub conventions_version: String,
    pub code_version: String,
    /// The config with every default filled in.
    pub config: serde_json::Value,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub wall_time_s: f64,
    pub truncation: Option<TruncationRecord>,
    pub pass: bool,
}

/// An output directory that remembers what was written into it.
pub struct Outputs {
    pub dir: PathBuf,
    files: Vec<String>,
    inputs: Vec<FileEntry>,
    started: Instant,
}

impl Outputs {
    pub fn create(dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir, files: Vec::new(), inputs: Vec::new(), started: Instant::now() })
    }

    /// Register `name` and return its full path.
    pub fn path(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        self.dir.join(name)
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(hash_file(path, &path.display().to_string())?);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(self.path(name), text + "\n")?;
        Ok(())
    }

    /// Hash every output and write `manifest.json`.
    pub fn finish(
        self,
        command: &str,
        config: serde_json::Value,
        truncation: Option<TruncationRecord>,
        pass: bool,
    ) -> Result<RunManifest> {
        let outputs = self.files.iter().map(|f| hash_file(&self.dir.join(f), f)).collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest {
            command: command.to_string(),
            conventions_version: CONVENTIONS_VERSION.to_string(),
            code_version: CODE_VERSION.to_string(),
            config,
            inputs: self.inputs,
            outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            truncation,
            pass,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(self.dir.join("manifest.json"), text + "\n")?;
        Ok(manifest)
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::Format(e.to_string()))
}

/// An evolved state with what is needed to read it.
pub struct Evolved {
    pub grid: NullGrid,
    pub state: FieldState,
    pub q0: f64,
    /// Last marched row.
    pub last_row: usize,
}

/// Build the slice and march it, calling `on_row` after each row.
pub fn evolve_config(cfg: &RunConfig, on_row: impl FnMut(usize, &FieldState) -> Result<()>) -> Result<Evolved> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let slice = cfg.slice(&grid)?;
    let state = march_with(&grid, startup(&grid, &slice, cfg.evolve.startup), &cfg.evolve, on_row)?;
    let last_row = cfg.evolve.row_limit.unwrap_or(grid.n()).min(grid.n());
    Ok(Evolved { grid, state, q0: slice.q0, last_row })
}

/// Everything `diagnose` reports about a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub source: String,
    pub grid: GridSpec,
    pub q0: f64,
    pub last_row: usize,
    pub residual: CovariantResidual,
    /// `max |q - q₀| / |q₀|` on `v = v_max`.
    pub charge_drift_raw: f64,
    /// The same after crediting the charge carried out through `v = v_max`.
    pub charge_drift: f64,
    pub leaves: usize,
    pub hardy_max: f64,
    pub hardy_completed_max: f64,
    /// Leaves whose completed ratio exceeds the Hardy constant.
    pub hardy_violations: usize,
    pub energy_at_start: f64,
    pub max_energy_increase: f64,
    pub fits: Vec<DecayFit>,
    /// Requested fits whose window held too few leaves.
    pub skipped_fits: Vec<String>,
    pub exterior: Option<ExteriorBound>,
}

impl RunSummary {
    pub fn fit(&self, quantity: &str) -> Option<&DecayFit> {
        self.fits.iter().find(|f| f.quantity == quantity)
    }
}

pub struct Diagnosis {
    pub report: FluxReport,
    pub charge: ChargeSeries,
    pub summary: RunSummary,
}

/// Leaf times whose points all lie on marched rows.
fn marched_taus(grid: &NullGrid, taus: Vec<f64>, last_row: usize) -> Vec<f64> {
    taus.into_iter()
        .filter(|&t| match grid.leaf(t) {
            Ok(l) => l.flat.iter().flat_map(|s| s.points.iter()).chain(&l.cone.points).all(|&(a, _)| a <= last_row),
            Err(_) => false,
        })
        .collect()
}

/// The default fit requests: `E` against `-(1+γ)` and each `W_p` against `p - 1 - γ`.
pub fn default_fit_requests(gamma: f64, p_list: &[f64]) -> Vec<(String, f64)> {
    let mut v = vec![("E_flux_charged".to_string(), -(1.0 + gamma))];
    v.extend(p_list.iter().map(|&p| (format!("W_{p}"), p - 1.0 - gamma)));
    v
}

pub fn diagnose(cfg: &RunConfig, ev: &Evolved) -> Result<Diagnosis> {
    let Evolved { grid, state, q0, last_row } = ev;
    let (grid, q0, last_row) = (grid, *q0, *last_row);
    let mut taus = cfg.exterior_taus(grid);
    taus.extend(cfg.interior_taus(grid));
    let taus = marched_taus(grid, taus, last_row);
    let p = &cfg.physics.p_list;
    let report = flux_report(grid, state, q0, &taus, p)?;
    let charge = charge_series(grid, state, q0, last_row);
    let interior: Vec<_> = report.leaves.iter().filter(|l| l.tau >= 0.0).collect();
    let tau: Vec<f64> = interior.iter().map(|l| l.tau).collect();
    let d = &cfg.diagnostics;
    let mut fits = Vec::new();
    let mut skipped_fits = Vec::new();
    for (name, e) in default_fit_requests(cfg.physics.gamma, p) {
        let col: Vec<f64> = report.column(&name).expect("requested columns exist").into_iter().skip(report.leaves.len() - interior.len()).collect();
        match fit_decay(&name, &tau, &col, e, d.fit_window, d.bound_factor) {
            Ok(f) => fits.push(f),
            Err(Error::Range(_)) => skipped_fits.push(name),
            Err(e) => return Err(e),
        }
    }
    let exterior = if report.leaves.iter().any(|l| l.tau < 0.0) && interior.first().is_some_and(|l| l.tau == 0.0) {
        Some(exterior_bound(&report, cfg.physics.gamma0, d.bound_factor)?)
    } else {
        None
    };
    let summary = RunSummary {
        source: cfg.data.name().to_string(),
        grid: grid.spec(),
        q0,
        last_row,
        residual: covariant_residual(grid, state, last_row),
        charge_drift_raw: charge.relative_drift_raw(),
        charge_drift: charge.relative_drift(),
        leaves: report.leaves.len(),
        hardy_max: report.leaves.iter().map(|l| l.hardy_ratio).fold(0.0, f64::max),
        hardy_completed_max: report.leaves.iter().map(|l| l.hardy_ratio_completed).fold(0.0, f64::max),
        hardy_violations: report.leaves.iter().filter(|l| l.hardy_ratio_completed > HARDY_CONSTANT).count(),
        energy_at_start: interior.first().map_or(0.0, |l| l.e_flux_charged),
        max_energy_increase: max_energy_increase(&report),
        fits,
        skipped_fits,
        exterior,
    };
    Ok(Diagnosis { report, charge, summary })
}

fn write_charge_csv(path: &Path, c: &ChargeSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "u,q,q_expected")?;
    for i in 0..c.u.len() {
        writeln!(w, "{:e},{:e},{:e}", c.u[i], c.q[i], c.q_expected[i])?;
    }
    w.flush()?;
    Ok(())
}

fn write_diagnosis(out: &mut Outputs, d: &Diagnosis) -> Result<()> {
    d.report.write_csv(&out.path("leaves.csv"))?;
    write_charge_csv(&out.path("charge.csv"), &d.charge)?;
    out.json("summary.json", &d.summary)
}

/// The decay statistics compared across truncations.
fn decay_statistics(s: &RunSummary) -> Vec<(String, f64)> {
    let mut v = Vec::new();
    for f in &s.fits {
        v.push((format!("{}_ratio", f.quantity), f.ratio));
        if f.quantity == "E_flux_charged" {
            v.push(("E_flux_charged_slope".into(), f.slope));
        }
    }
    if let Some(e) = &s.exterior {
        v.push(("exterior_chargeless_ratio".into(), e.chargeless_ratio));
    }
    v
}

/// Rerun with `v_max` and `N` doubled (same `h`) and compare the decay statistics.
///
/// The exterior statistic of the larger run is restricted to the exterior
/// leaves the base run has, so only the cut moves.
pub fn truncation_sensitivity(cfg: &RunConfig, base: &RunSummary, tolerance: f64) -> Result<TruncationSensitivity> {
    let mut big = cfg.clone();
    big.grid.v_max *= 2.0;
    big.grid.n *= 2;
    big.evolve.row_limit = cfg.evolve.row_limit.map(|r| 2 * r);
    let ev = evolve_config(&big, |_, _| Ok(()))?;
    let lo = -(cfg.grid.v_max - cfg.grid.r_foliation);
    let mut d = diagnose(&big, &ev)?;
    drop(ev);
    d.report.leaves.retain(|l| l.tau >= lo);
    if let Some(e) = &mut d.summary.exterior {
        *e = exterior_bound(&d.report, cfg.physics.gamma0, cfg.diagnostics.bound_factor)?;
    }
    let a = decay_statistics(base);
    let b = decay_statistics(&d.summary);
    let mut statistics = Vec::new();
    for (name, x) in &a {
        if let Some((_, y)) = b.iter().find(|(n, _)| n == name) {
            let rel = if *x == 0.0 { (y - x).abs() } else { ((y - x) / x).abs() };
            statistics.push((name.clone(), *x, *y, rel));
        }
    }
    let max_relative_change = statistics.iter().map(|s| s.3).fold(0.0, f64::max);
    Ok(TruncationSensitivity {
        v_max_doubled: big.grid.v_max,
        n_doubled: big.grid.n,
        statistics,
        max_relative_change,
        tolerance,
        pass: max_relative_change <= tolerance,
    })
}

pub struct EvolveOutcome {
    pub summary: RunSummary,
    pub manifest: RunManifest,
}

/// Evolve, write checkpoints, the residual log, leaf and charge CSVs, the
/// summary and the manifest.
pub fn cmd_evolve(cfg: &RunConfig) -> Result<EvolveOutcome> {
    cfg.validate()?;
    let mut out = Outputs::create(resolve_output_dir(&cfg.output.dir))?;
    let ext = match cfg.output.format {
        crate::fields::CheckpointFormat::Binary => "bin",
        crate::fields::CheckpointFormat::Csv => "csv",
    };
    let cadence = cfg.output.cadence;
    let grid = cfg.grid()?;
    let q0 = cfg.slice(&grid)?.q0;
    let mut pending = Vec::new();
    let ev = evolve_config(cfg, |a, st| {
        if cadence > 0 && a % cadence == 0 {
            let name = format!("checkpoint_{a:06}.{ext}");
            write_checkpoint(&out.dir.join(&name), &grid, st, q0, cfg.output.format)?;
            pending.push(name);
        }
        Ok(())
    })?;
    for name in pending {
        out.path(&name);
    }
    if cfg.output.checkpoint {
        write_checkpoint(&out.path(&format!("state.{ext}")), &ev.grid, &ev.state, ev.q0, cfg.output.format)?;
    }
    write_residual_log(&out.path("residuals.csv"), &residual_log(&ev.grid, &ev.state, ev.last_row))?;
    let d = diagnose(cfg, &ev)?;
    let radius_at_tau0 = ev.grid.leaf(0.0).map(|l| l.truncation_radius).unwrap_or(f64::NAN);
    drop(ev);
    write_diagnosis(&mut out, &d)?;
    let sensitivity = match cfg.diagnostics.truncation_check {
        true => Some(truncation_sensitivity(cfg, &d.summary, cfg.diagnostics.truncation_tolerance)?),
        false => None,
    };
    let truncation = TruncationRecord { v_max: cfg.grid.v_max, radius_at_tau0, sensitivity };
    let manifest = out.finish("evolve", to_json(cfg)?, Some(truncation), true)?;
    Ok(EvolveOutcome { summary: d.summary, manifest })
}

/// Diagnose a checkpoint with the diagnostics and physics sections of `cfg`.
pub fn cmd_diagnose(cfg: &RunConfig, checkpoint: &Path) -> Result<EvolveOutcome> {
    cfg.validate()?;
    let (header, grid, state) = read_checkpoint(checkpoint)?;
    if header.conventions_version != CONVENTIONS_VERSION {
        return Err(constraint(format!("checkpoint uses conventions {}; this build reads {CONVENTIONS_VERSION}", header.conventions_version)));
    }
    let mut cfg = cfg.clone();
    cfg.grid = header.grid;
    let mut out = Outputs::create(resolve_output_dir(&cfg.output.dir))?;
    out.input(checkpoint)?;
    let last_row = cfg.evolve.row_limit.unwrap_or(grid.n()).min(grid.n());
    let ev = Evolved { grid, state, q0: header.q0, last_row };
    let d = diagnose(&cfg, &ev)?;
    write_diagnosis(&mut out, &d)?;
    let radius_at_tau0 = ev.grid.leaf(0.0).map(|l| l.truncation_radius).unwrap_or(f64::NAN);
    let truncation = TruncationRecord { v_max: cfg.grid.v_max, radius_at_tau0, sensitivity: None };
    let manifest = out.finish("diagnose", to_json(&cfg)?, Some(truncation), true)?;
    Ok(EvolveOutcome { summary: d.summary, manifest })
}

/// What `fit` fits: `(column, hypothesised exponent)` pairs and the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRequest {
    pub quantities: Vec<(String, f64)>,
    pub window: [f64; 2],
    pub bound_factor: f64,
}

pub fn fit_table(table: &Table, req: &FitRequest) -> Result<Vec<DecayFit>> {
    if req.quantities.is_empty() {
        return Err(constraint("no quantities to fit"));
    }
    let tau = table.column("tau")?;
    req.quantities
        .iter()
        .map(|(name, e)| fit_decay(name, &tau, &table.column(name)?, *e, req.window, req.bound_factor))
        .collect()
}

/// Fit decay rates to columns of a leaf CSV; passes when every fit is bounded.
pub fn cmd_fit(csv: &Path, req: &FitRequest, out_dir: &str) -> Result<(Vec<DecayFit>, RunManifest)> {
    let table = Table::read_csv(csv)?;
    let fits = fit_table(&table, req)?;
    let mut out = Outputs::create(resolve_output_dir(out_dir))?;
    out.input(csv)?;
    out.json("fits.json", &fits)?;
    let pass = fits.iter().all(|f| f.pass);
    let manifest = out.finish("fit", to_json(req)?, None, pass)?;
    Ok((fits, manifest))
}

pub fn cmd_check_identities(lab: &LabConfig, out_dir: &str) -> Result<(LabReport, RunManifest)> {
    lab.validate()?;
    let report = run_lab(lab)?;
    let mut out = Outputs::create(resolve_output_dir(out_dir))?;
    out.json("identities.json", &report)?;
    let manifest = out.finish("check-identities", to_json(lab)?, None, report.pass)?;
    Ok((report, manifest))
}

/// How a quantity's observed order is read off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantityKind {
    /// An error that vanishes in the limit; order from consecutive ratios.
    Error,
    /// A value with an unknown limit; order from three-level Richardson ratios.
    Value,
}

/// One row of the convergence table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub quantity: String,
    pub kind: QuantityKind,
    pub values: Vec<f64>,
    /// One entry per consecutive pair (errors) or triple (values).
    pub orders: Vec<f64>,
    /// Errors (or level differences) shrink at every refinement.
    pub monotone: bool,
    /// Every error sits at round-off.
    pub exact: bool,
}

impl ConvergenceRow {
    pub fn new(quantity: &str, kind: QuantityKind, values: Vec<f64>, ratio: f64, round_off: f64) -> Self {
        let lr = ratio.ln();
        let errs: Vec<f64> = match kind {
            QuantityKind::Error => values.iter().map(|x| x.abs()).collect(),
            QuantityKind::Value => values.windows(2).map(|w| (w[1] - w[0]).abs()).collect(),
        };
        let orders = errs.windows(2).map(|w| (w[0] / w[1]).ln() / lr).collect();
        let monotone = errs.windows(2).all(|w| w[1] < w[0]);
        let exact = errs.iter().all(|&e| e <= round_off);
        Self { quantity: quantity.to_string(), kind, values, orders, monotone, exact }
    }

    /// Order of the finest pair or triple.
    pub fn finest_order(&self) -> f64 {
        self.orders.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub levels: Vec<usize>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn row(&self, quantity: &str) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let k = self.levels.len();
        let mut w = BufWriter::new(File::create(path)?);
        let mut head = vec!["quantity".to_string(), "kind".into()];
        head.extend(self.levels.iter().map(|n| format!("N{n}")));
        head.extend((0..k - 1).map(|i| format!("order_{i}")));
        head.extend(["monotone".into(), "exact".into()]);
        writeln!(w, "{}", head.join(","))?;
        for r in &self.rows {
            let kind = match r.kind {
                QuantityKind::Error => "error",
                QuantityKind::Value => "value",
            };
            let mut cells = vec![r.quantity.clone(), kind.into()];
            cells.extend(r.values.iter().map(|x| format!("{x:e}")));
            cells.extend((0..k - 1).map(|i| r.orders.get(i).map_or(String::new(), |x| format!("{x:.4}"))));
            cells.extend([(r.monotone as u8).to_string(), (r.exact as u8).to_string()]);
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Quantities measured on one level.
fn level_quantities(cfg: &RunConfig, ev: &Evolved) -> Result<Vec<(&'static str, QuantityKind, f64)>> {
    use QuantityKind::*;
    let Evolved { grid, state: st, q0, last_row } = ev;
    let res = covariant_residual(grid, st, *last_row);
    let mut v = Vec::new();
    match cfg.data {
        DataSource::FreeWave(fw) => {
            let (mut e_psi, mut e_zeta) = (0.0f64, 0.0f64);
            for a in 0..=*last_row {
                for b in grid.row_start(a)..=grid.n() {
                    let i = grid.idx(a, b);
                    e_psi = e_psi.max((st.psi[i] - fw.psi(grid.u(a), grid.v(b))).norm());
                    e_zeta = e_zeta.max((st.du_psi[i] - fw.du_psi(grid.u(a))).norm());
                }
            }
            v.push(("psi_error", Error, e_psi));
            v.push(("zeta_error", Error, e_zeta));
        }
        DataSource::Coulomb(_) => {
            let mut drift = 0.0f64;
            let mut psi = 0.0f64;
            for a in 0..=*last_row {
                for b in grid.row_start(a)..=grid.n() {
                    let i = grid.idx(a, b);
                    drift = drift.max((st.q[i] - q0).abs());
                    psi = psi.max(st.psi[i].norm());
                }
            }
            v.push(("charge_error", Error, drift));
            v.push(("psi_max", Error, psi));
        }
        DataSource::Profile(_) => {
            let c = charge_series(grid, st, *q0, *last_row);
            v.push(("charge_drift", Error, c.relative_drift()));
            v.push(("charge_drift_raw", Error, c.relative_drift_raw()));
            let tau_ref = cfg.diagnostics.fit_window[0].min(2.0 * grid.v_max() - grid.big_r() - 1.0);
            let tau_ref = grid.lattice_taus(tau_ref, tau_ref + 1.0, 1.0).first().copied().unwrap_or(0.0);
            let leaf = grid.leaf(tau_ref)?;
            v.push(("E_flux_ref", Value, crate::diagnostics::energy_flux(grid, st, &leaf, *q0, false).value));
            v.push(("W_1_ref", Value, crate::diagnostics::weighted_flux(grid, st, &leaf, 1.0)?));
            let tau2 = grid.lattice_taus(0.0, cfg.diagnostics.fit_window[0].min(20.0), 1.0).last().copied().unwrap_or(0.0);
            if tau2 > 0.0 {
                v.push(("time_closure", Error, lifted_closure(grid, st, &Triple::Time, 0.0, tau2)?.residual));
                v.push(("rp1_closure", Error, lifted_closure(grid, st, &Triple::Rp { p: 1.0 }, 0.0, tau2)?.residual));
                v.push(("energy_balance", Error, crate::diagnostics::energy_balance(grid, st, 0.0, tau2, *q0)?.residual));
            }
        }
    }
    v.push(("qu_residual", Error, res.qu));
    v.push(("wave_residual", Error, res.wave));
    v.push(("maxwell_residual", Error, res.maxwell));
    v.push(("zeta_residual", Error, res.zeta));
    Ok(v)
}

/// Observed orders over grids with `n` in `levels` at the config's `v_max`.
pub fn convergence(cfg: &RunConfig, levels: &[usize]) -> Result<ConvergenceTable> {
    if levels.len() < 3 {
        return Err(constraint("convergence needs at least three levels"));
    }
    let ratio = levels[1] as f64 / levels[0] as f64;
    if !(ratio > 1.0) || levels.windows(2).any(|w| w[1] as f64 != w[0] as f64 * ratio) {
        return Err(constraint("levels must grow by a constant ratio"));
    }
    let base_rows = cfg.evolve.row_limit.map(|r| (r, cfg.grid.n));
    let mut cols: Vec<Vec<(&'static str, QuantityKind, f64)>> = Vec::new();
    for &n in levels {
        let mut c = cfg.clone();
        c.grid.n = n;
        if let Some((r, n0)) = base_rows {
            if (r * n) % n0 != 0 {
                return Err(range("row limit does not scale to every level"));
            }
            c.evolve.row_limit = Some(r * n / n0);
        }
        let ev = evolve_config(&c, |_, _| Ok(()))?;
        cols.push(level_quantities(&c, &ev)?);
    }
    // Residuals are difference quotients, so their round-off floor grows like 1/h.
    let round_off = 1e-12 * (1.0 + cfg.slice(&cfg.grid()?)?.q0.abs());
    let h_fine = 2.0 * cfg.grid.v_max / levels[levels.len() - 1] as f64;
    let rows = (0..cols[0].len())
        .map(|k| {
            let (name, kind, _) = cols[0][k];
            let floor = if name.ends_with("_residual") { round_off / h_fine } else { round_off };
            ConvergenceRow::new(name, kind, cols.iter().map(|c| c[k].2).collect(), ratio, floor)
        })
        .collect();
    Ok(ConvergenceTable { levels: levels.to_vec(), rows })
}

pub fn cmd_convergence(cfg: &RunConfig, levels: &[usize]) -> Result<(ConvergenceTable, RunManifest)> {
    cfg.validate()?;
    let table = convergence(cfg, levels)?;
    let mut out = Outputs::create(resolve_output_dir(&cfg.output.dir))?;
    table.write_csv(&out.path("convergence.csv"))?;
    out.json("convergence.json", &table)?;
    let config = serde_json::json!({ "run": to_json(cfg)?, "levels": levels });
    let manifest = out.finish("convergence", config, None, true)?;
    Ok((table, manifest))
}

/// A smooth random `χ(u) = Σ a sin(k u + θ)` drawn from `seed`.
pub fn random_gauge(seed: u64) -> GaugeMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64)> =
        (0..4).map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(0.05..0.6), rng.gen_range(0.0..std::f64::consts::TAU))).collect();
    let m2 = modes.clone();
    GaugeMap::of_u(
        move |u| modes.iter().map(|(a, k, th)| a * (k * u + th).sin()).sum(),
        move |u| m2.iter().map(|(a, k, th)| a * k * (k * u + th).cos()).sum(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeCheck {
    pub seed: u64,
    /// Per reported column, `max |x' - x| / max |x|`.
    pub changes: Vec<(String, f64)>,
    pub max_change: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn column_change(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).map(|x| x.abs()).fold(0.0, f64::max);
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Diagnose a state before and after a random residual gauge map `χ(u)`.
pub fn gauge_check(cfg: &RunConfig, ev: &Evolved, tolerance: f64) -> Result<GaugeCheck> {
    let d1 = diagnose(cfg, ev)?;
    let moved = Evolved { grid: ev.grid.clone(), state: gauge_transform(&ev.grid, &ev.state, &random_gauge(cfg.seed))?, ..*ev };
    let d2 = diagnose(cfg, &moved)?;
    let mut changes = Vec::new();
    for name in d1.report.header() {
        if let (Some(a), Some(b)) = (d1.report.column(&name), d2.report.column(&name)) {
            changes.push((name, column_change(&a, &b)));
        }
    }
    changes.push(("charge_series".into(), column_change(&d1.charge.q, &d2.charge.q)));
    let s = |x: &RunSummary| {
        let mut v = vec![x.charge_drift, x.charge_drift_raw, x.hardy_max, x.hardy_completed_max, x.max_energy_increase];
        v.extend(x.fits.iter().flat_map(|f| [f.slope, f.intercept, f.ratio]));
        v.extend(x.exterior.iter().flat_map(|e| [e.chargeless_ratio, e.raw_ratio]));
        v
    };
    let (a, b) = (s(&d1.summary), s(&d2.summary));
    let summary_change = a.iter().zip(&b).map(|(x, y)| column_change(&[*x], &[*y])).fold(0.0, f64::max);
    changes.push(("summary".into(), summary_change));
    let max_change = changes.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(GaugeCheck { seed: cfg.seed, changes, max_change, tolerance, pass: max_change <= tolerance })
}

pub fn cmd_gauge_check(cfg: &RunConfig) -> Result<(GaugeCheck, RunManifest)> {
    cfg.validate()?;
    let ev = evolve_config(cfg, |_, _| Ok(()))?;
    let check = gauge_check(cfg, &ev, cfg.diagnostics.gauge_tolerance)?;
    let mut out = Outputs::create(resolve_output_dir(&cfg.output.dir))?;
    out.json("gauge.json", &check)?;
    let manifest = out.finish("gauge-check", to_json(cfg)?, None, check.pass)?;
    Ok((check, manifest))
}
