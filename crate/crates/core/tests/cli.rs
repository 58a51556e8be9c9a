use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mkg_lab::config::{DataSource, RunConfig};
use mkg_lab::fields::CheckpointFormat;
use mkg_lab::initdata::{DataProfile, FreeWave};
use mkg_lab::nullgrid::GridSpec;
use proptest::prelude::*;
use serde_json::Value;

/// Fresh scratch directory per test; removed first so reruns start clean.
fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("mkg-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn mkg(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mkg")).args(args).env("MKG_OUTPUT_ROOT", root).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, cfg: &RunConfig) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, cfg.to_toml().unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn small(n: usize) -> RunConfig {
    RunConfig { grid: GridSpec { v_max: 16.0, n, r_foliation: 2.0 }, ..Default::default() }
}

/// Header and rows of a CSV without quoting.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let head = lines.next().unwrap().split(',').map(String::from).collect();
    (head, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn foliation_radius_at_most_one_is_a_constraint_violation() {
    let root = scratch("r1");
    let mut cfg = small(256);
    cfg.grid.r_foliation = 1.0;
    let p = root.join("bad.toml");
    fs::write(&p, cfg.to_toml().unwrap()).unwrap();
    let o = mkg(&root, &["evolve", "-c", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("R > 1"), "{}", stderr(&o));
}

#[test]
fn weight_outside_zero_two_is_rejected() {
    let root = scratch("p25");
    let o = mkg(&root, &["check-identities", "--p", "2.5"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("for all 0 <= p <= 2"), "{}", stderr(&o));
}

#[test]
fn zero_field_identities_have_zero_residuals() {
    let root = scratch("zero-field");
    let o = mkg(&root, &["check-identities", "--zero-field"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&root.join("identities/identities.json"));
    for t in r["triples"].as_array().unwrap() {
        for key in ["divergence_residual", "stokes_residual"] {
            assert!(t[key].as_array().unwrap().iter().all(|x| x.as_f64() == Some(0.0)), "{}: {key}", t["name"]);
        }
        assert_eq!(t["closed_form_gap"].as_f64(), Some(0.0));
    }
}

#[test]
fn repeated_runs_produce_identical_outputs() {
    let root = scratch("repeat");
    let cfg = write_config(&root, &small(256));
    let hashes = |dir: &str| {
        let o = mkg(&root, &["evolve", "-c", &cfg, "-o", dir]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        json(&root.join(dir).join("manifest.json"))["outputs"].clone()
    };
    let (a, b) = (hashes("a"), hashes("b"));
    assert!(!a.as_array().unwrap().is_empty());
    assert_eq!(a, b);
}

#[test]
fn output_root_resolves_relative_directories_only() {
    let root = scratch("root");
    let cfg = write_config(&root, &small(128));
    assert_eq!(code(&mkg(&root, &["evolve", "-c", &cfg, "-o", "rel"])), 0);
    assert!(root.join("rel/manifest.json").is_file());

    let abs = scratch("root-abs");
    assert_eq!(code(&mkg(&root, &["evolve", "-c", &cfg, "-o", abs.to_str().unwrap()])), 0);
    assert!(abs.join("manifest.json").is_file());
}

#[test]
fn zero_data_gives_zero_flux_columns() {
    let root = scratch("zero-data");
    let mut cfg = small(256);
    cfg.data = DataSource::Profile(DataProfile { amplitude: 0.0, ..Default::default() });
    let c = write_config(&root, &cfg);
    let o = mkg(&root, &["evolve", "-c", &c, "-o", "z"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (head, rows) = read_csv(&root.join("z/leaves.csv"));
    assert!(!rows.is_empty());
    for (k, name) in head.iter().enumerate() {
        if name.starts_with("E_") || name.starts_with("W_") || name == "charge" {
            for r in &rows {
                assert_eq!(r[k].parse::<f64>().unwrap(), 0.0, "{name} at tau {}", r[0]);
            }
        }
    }
}

#[test]
fn default_interior_energy_does_not_grow() {
    let root = scratch("default");
    let o = mkg(&root, &["evolve", "-o", "d"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (head, rows) = read_csv(&root.join("d/leaves.csv"));
    let col = |n: &str| head.iter().position(|h| h == n).unwrap();
    let (kind, e) = (col("kind"), col("E_flux_charged"));
    let es: Vec<f64> = rows.iter().filter(|r| r[kind] == "interior").map(|r| r[e].parse().unwrap()).collect();
    // Discrete flux loss is only monotone up to the truncation error, h² E₀.
    let g = RunConfig::default().grid;
    let h = 2.0 * g.v_max / g.n as f64;
    let slack = h * h * es[0];
    assert!(es.len() > 10);
    for w in es.windows(2) {
        assert!(w[1] <= w[0] + slack, "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn runaway_growth_is_a_numerical_failure() {
    let root = scratch("blowup");
    let mut cfg = small(128);
    cfg.data = DataSource::Profile(DataProfile { amplitude: 50.0, winding: 3, lambda: 5.0, ..Default::default() });
    cfg.evolve.growth_limit = 1.5;
    let c = write_config(&root, &cfg);
    let o = mkg(&root, &["evolve", "-c", &c]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("numerical"), "{}", stderr(&o));
}

fn synthetic_csv(dir: &Path, q: impl Fn(f64) -> f64) -> String {
    let mut s = String::from("tau,Q\n");
    for k in 0..=90 {
        let tau = k as f64;
        s += &format!("{tau},{:e}\n", q(tau));
    }
    let p = dir.join("leaves.csv");
    fs::write(&p, s).unwrap();
    p.to_str().unwrap().to_string()
}

fn fits(root: &Path, dir: &str) -> Vec<Value> {
    json(&root.join(dir).join("fits.json")).as_array().unwrap().clone()
}

#[test]
fn fit_recovers_a_power_law() {
    let root = scratch("fit-power");
    let csv = synthetic_csv(&root, |t| 3.0 * (1.0 + t).powf(-1.8));
    let o = mkg(&root, &["fit", &csv, "--column", "Q:-1.8", "-o", "f"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let f = fits(&root, "f");
    assert!((f[0]["slope"].as_f64().unwrap() + 1.8).abs() < 1e-9);
}

#[test]
fn constant_column_has_zero_slope_and_fails_the_bound() {
    let root = scratch("fit-const");
    let csv = synthetic_csv(&root, |_| 2.0);
    let o = mkg(&root, &["fit", &csv, "--column", "Q:-1.8", "-o", "f"]);
    assert_eq!(code(&o), 3);
    assert!(fits(&root, "f")[0]["slope"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn empty_fit_window_is_an_error() {
    let root = scratch("fit-empty");
    let csv = synthetic_csv(&root, |t| (1.0 + t).powi(-2));
    let o = mkg(&root, &["fit", &csv, "--column", "Q:-2", "--window", "200,300"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let o = mkg(&root, &["fit", &csv, "--column", "missing:-2"]);
    assert_eq!(code(&o), 1);
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        any::<u64>(),
        prop::sample::select(vec![(8.0, 64usize), (16.0, 256), (32.0, 2048)]),
        0.1f64..1.0,
        0.01f64..0.24,
        prop::option::of(5.0f64..20.0),
        any::<bool>(),
        (0.1f64..3.0, -3i32..=3, 0.1f64..2.0, any::<bool>()),
    )
        .prop_map(|(seed, (v_max, n), g0, eps, tau_max, csv, (amp, winding, lambda, free))| {
            let mut c = RunConfig { seed, grid: GridSpec { v_max, n, r_foliation: 2.0 }, ..Default::default() };
            c.physics.gamma0 = g0;
            c.physics.gamma = 0.5 * g0;
            c.physics.eps = eps;
            c.physics.p_list = vec![0.0, 1.0 + 0.5 * g0];
            c.diagnostics.tau_max = tau_max;
            c.output.format = if csv { CheckpointFormat::Csv } else { CheckpointFormat::Binary };
            c.data = if free {
                DataSource::FreeWave(FreeWave { amplitude: amp, ..Default::default() })
            } else {
                DataSource::Profile(DataProfile { amplitude: amp, winding, lambda, ..Default::default() })
            };
            c
        })
}

proptest! {
    #[test]
    fn config_survives_a_toml_round_trip(cfg in arb_config()) {
        let text = cfg.to_toml().unwrap();
        prop_assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    }
}
