//! `mkg`: evolve, diagnose, fit, check-identities, convergence, gauge-check.
//!
//! Exit codes: 0 pass, 1 constraint violation, 2 numerical failure,
//! 3 acceptance failure. Relative output directories resolve under
//! `$MKG_OUTPUT_ROOT`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mkg_lab::config::RunConfig;
use mkg_lab::identity_lab::LabConfig;
use mkg_lab::run::{self, default_fit_requests, FitRequest};
use mkg_lab::{Error, Result};

#[derive(Parser)]
#[command(name = "mkg", version, about = "Spherically symmetric Maxwell-Klein-Gordon: evolution, diagnostics and identity checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Run config (TOML); defaults when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory, overriding `[output] dir`.
    #[arg(long, short)]
    out: Option<String>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// March the configured data and write checkpoints, leaf CSV and manifest.
    Evolve(RunArgs),
    /// Recompute the leaf diagnostics of a checkpoint.
    Diagnose {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Fit decay rates to a leaf CSV.
    Fit {
        csv: PathBuf,
        /// Hypothesised decay `(1+τ)^{-1-γ}` of the energy flux.
        #[arg(long, default_value_t = 0.8)]
        gamma: f64,
        /// Weights `p` of the `W_p` columns, fitted against `(1+τ)^{p-1-γ}`.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0, 1.8])]
        p: Vec<f64>,
        /// `column:exponent` pairs fitted instead of the energy and `W_p` columns.
        #[arg(long = "column")]
        columns: Vec<String>,
        #[arg(long, value_delimiter = ',', default_values_t = [10.0, 80.0])]
        window: Vec<f64>,
        #[arg(long, default_value_t = 10.0)]
        bound: f64,
        #[arg(long, short, default_value = "fit")]
        out: String,
    },
    /// Run the identity laboratory on synthetic fields.
    CheckIdentities {
        /// Lab config (TOML); defaults when omitted.
        #[arg(long, short)]
        config: Option<PathBuf>,
        /// Override the `p` list of the r-weighted triples.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        /// Use the zero field.
        #[arg(long)]
        zero_field: bool,
        #[arg(long, short, default_value = "identities")]
        out: String,
    },
    /// Observed orders over grid levels.
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [512, 1024, 2048])]
        levels: Vec<usize>,
    },
    /// Diagnostics before and after a random residual gauge map.
    GaugeCheck(RunArgs),
}

/// `Ok(true)` is a pass, `Ok(false)` an acceptance failure.
fn dispatch(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Evolve(a) => {
            let o = run::cmd_evolve(&a.load()?)?;
            let s = &o.summary;
            println!("q0 = {:.6e}, leaves = {}, max completed Hardy ratio = {:.3}", s.q0, s.leaves, s.hardy_completed_max);
            for f in &s.fits {
                println!("{}: slope {:.3}, bound ratio {:.3}", f.quantity, f.slope, f.ratio);
            }
            if let Some(t) = o.manifest.truncation.as_ref().and_then(|t| t.sensitivity.as_ref()) {
                println!("truncation sensitivity: max relative change {:.3}", t.max_relative_change);
            }
            Ok(true)
        }
        Cmd::Diagnose { run: a, checkpoint } => {
            let o = run::cmd_diagnose(&a.load()?, &checkpoint)?;
            println!("leaves = {}, max completed Hardy ratio = {:.3}", o.summary.leaves, o.summary.hardy_completed_max);
            Ok(true)
        }
        Cmd::Fit { csv, gamma, p, columns, window, bound, out } => {
            let quantities = if columns.is_empty() {
                default_fit_requests(gamma, &p)
            } else {
                columns
                    .iter()
                    .map(|c| {
                        let (name, e) = c.split_once(':').ok_or_else(|| Error::Format(format!("expected column:exponent, got {c}")))?;
                        let e = e.parse().map_err(|_| Error::Format(format!("bad exponent in {c}")))?;
                        Ok((name.to_string(), e))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            let [lo, hi] = window[..] else {
                return Err(Error::Format("window takes two values".into()));
            };
            let (fits, m) = run::cmd_fit(&csv, &FitRequest { quantities, window: [lo, hi], bound_factor: bound }, &out)?;
            for f in &fits {
                println!("{}: slope {:.4}, bound ratio {:.3} ({})", f.quantity, f.slope, f.ratio, if f.pass { "ok" } else { "exceeded" });
            }
            Ok(m.pass)
        }
        Cmd::CheckIdentities { config, p, zero_field, out } => {
            let mut lab: LabConfig = match config {
                Some(path) => toml::from_str(&std::fs::read_to_string(path)?).map_err(|e| Error::Format(e.to_string()))?,
                None => LabConfig::default(),
            };
            if let Some(p) = p {
                lab.p_list = p;
            }
            if zero_field {
                lab.modes = 0;
            }
            let (r, _) = run::cmd_check_identities(&lab, &out)?;
            for t in &r.triples {
                let last = t.divergence_orders.last().copied().flatten();
                println!("{:<18} divergence order {:>6} algebra gap {:.1e} {}", t.name, last.map_or("exact".into(), |o| format!("{o:.2}")), t.closed_form_gap.max(t.boundary.max()), if t.pass { "PASS" } else { "FAIL" });
            }
            println!("gauge change {:.1e}, Bianchi residual {:.1e}", r.gauge_change, r.bianchi_residual);
            Ok(r.pass)
        }
        Cmd::Convergence { run: a, levels } => {
            let (t, _) = run::cmd_convergence(&a.load()?, &levels)?;
            for r in &t.rows {
                let flag = if r.exact { " exact" } else if !r.monotone { " non-monotone" } else { "" };
                println!("{:<18} orders {:?}{flag}", r.quantity, r.orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>());
            }
            Ok(true)
        }
        Cmd::GaugeCheck(a) => {
            let (g, _) = run::cmd_gauge_check(&a.load()?)?;
            println!("max relative change {:.2e} (tolerance {:.0e})", g.max_change, g.tolerance);
            Ok(g.pass)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("mkg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
