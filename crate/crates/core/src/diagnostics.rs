//! Flux, bulk and weighted-energy functionals on evolved states, and decay fits.
//!
//! Everything here reads `|D_v ψ|` (row-local differences), `|ζ|`, `|ψ|` and
//! `q`, so a residual gauge map `χ(u)` changes nothing but round-off.
//!
//! Spherical reductions used throughout, with `ψ = rφ` and `q̃ = r² ρ̃`:
//!
//! ```text
//! r²|D_v φ|² = |D_v ψ - ψ/r|²        r²|D_u φ|² = |ζ + ψ/r|²
//! r²(|D_t φ|² + |D_r φ|²) = ½(r²|D_v φ|² + r²|D_u φ|²)
//! ```

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{constraint, range, Error, Result};
use crate::fields::{dv_row, q_tilde, weighted_null_derivatives, FieldState};
use crate::nullgrid::{Leaf, LeafKind, NullGrid, Region};
use crate::sum::NeumaierSum;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// A surface integral cut off at `v = v_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flux {
    pub value: f64,
    /// Set when the integrand does not vanish at the cut.
    pub truncated: bool,
}

fn charge_term(grid: &NullGrid, st: &FieldState, q0: f64, chargeless: bool, a: usize, b: usize) -> f64 {
    let r = grid.r(a, b);
    if r == 0.0 {
        return 0.0;
    }
    let q = if chargeless { q_tilde(grid, st, q0, a, b) } else { st.q[grid.idx(a, b)] };
    q * q / (r * r)
}

/// Energy integrand on the flat part, per `dr` and without `4π`.
fn flat_density(grid: &NullGrid, st: &FieldState, q0: f64, chargeless: bool, scalar_only: bool, a: usize, b: usize) -> f64 {
    let (lv, lu) = weighted_null_derivatives(grid, st, a, b);
    let f = if scalar_only { 0.0 } else { charge_term(grid, st, q0, chargeless, a, b) };
    0.5 * (lv + lu) + f
}

/// Energy integrand on an outgoing cone, per `dv` and without `4π`.
fn cone_density(grid: &NullGrid, st: &FieldState, q0: f64, chargeless: bool, scalar_only: bool, a: usize, b: usize) -> f64 {
    let (lv, _) = weighted_null_derivatives(grid, st, a, b);
    let f = if scalar_only { 0.0 } else { charge_term(grid, st, q0, chargeless, a, b) };
    lv + f
}

fn leaf_integral(leaf: &Leaf, flat: impl FnMut(usize, usize) -> f64, mut cone: impl FnMut(usize, usize) -> f64) -> Flux {
    let mut s = NeumaierSum::new();
    if let Some(seg) = &leaf.flat {
        s.add(seg.integrate(flat));
    }
    s.add(leaf.cone.integrate(&mut cone));
    let &(a, b) = leaf.cone.points.last().expect("cones are never empty");
    Flux { value: FOUR_PI * s.value(), truncated: cone(a, b) != 0.0 }
}

/// `E[φ, F](Σ_τ)`, or `E[φ, F̃]` with `chargeless`; the two differ only on
/// exterior leaves.
pub fn energy_flux(grid: &NullGrid, st: &FieldState, leaf: &Leaf, q0: f64, chargeless: bool) -> Flux {
    leaf_integral(
        leaf,
        |a, b| flat_density(grid, st, q0, chargeless, false, a, b),
        |a, b| cone_density(grid, st, q0, chargeless, false, a, b),
    )
}

/// Scalar part `E[φ](Σ_τ)` of the energy flux.
pub fn scalar_energy_flux(grid: &NullGrid, st: &FieldState, leaf: &Leaf) -> Flux {
    leaf_integral(
        leaf,
        |a, b| flat_density(grid, st, 0.0, false, true, a, b),
        |a, b| cone_density(grid, st, 0.0, false, true, a, b),
    )
}

/// Energy flux of the cone part only.
pub fn cone_energy_flux(grid: &NullGrid, st: &FieldState, leaf: &Leaf, q0: f64, chargeless: bool) -> Flux {
    let mut cone = |a, b| cone_density(grid, st, q0, chargeless, false, a, b);
    let v = leaf.cone.integrate(&mut cone);
    let &(a, b) = leaf.cone.points.last().expect("cones are never empty");
    Flux { value: FOUR_PI * v, truncated: cone(a, b) != 0.0 }
}

pub fn check_p(p: f64) -> Result<()> {
    if !(0.0..=2.0).contains(&p) {
        return Err(constraint(format!("p = {p} outside [0, 2]; the r-weighted identity needs 0 <= p <= 2")));
    }
    Ok(())
}

/// `W_p = 4π ∫_{S_τ} r^p |D_v ψ|² dv`.
pub fn weighted_flux(grid: &NullGrid, st: &FieldState, leaf: &Leaf, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(FOUR_PI
        * leaf.cone.integrate(|a, b| {
            let r = grid.r(a, b);
            r.powf(p) * dv_row(grid, &st.psi, a, b).norm_sqr()
        }))
}

/// Energy through `v = v_max` between rows `a1 <= a2`:
/// `4π ∫ (|ζ + ψ/r|² + q²/r²) du`.
pub fn incoming_flux(grid: &NullGrid, st: &FieldState, a1: usize, a2: usize, q0: f64, chargeless: bool) -> f64 {
    let n = grid.n();
    let h = grid.h();
    let f = |a: usize| {
        let (_, lu) = weighted_null_derivatives(grid, st, a, n);
        lu + charge_term(grid, st, q0, chargeless, a, n)
    };
    let mut s = NeumaierSum::new();
    for a in a1..a2 {
        s.add(0.5 * h * (f(a) + f(a + 1)));
    }
    FOUR_PI * s.value()
}

/// Spacetime integrals of the local energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ile {
    /// `∫∫ (|D̄φ|² + |F̃|²)(1+r)^{-1-ε} dvol` with `D̄φ = (Dφ, (1+r)^{-1}φ)`.
    pub full: f64,
    /// `∫∫ (|D̸φ|² + ρ̃² + σ²)(1+r)^{-1} dvol`.
    pub angular: f64,
}

/// `dvol = 2 r² du dv dω`.
pub fn bulk_ile(grid: &NullGrid, st: &FieldState, region: &Region, eps: f64, q0: f64, chargeless: bool) -> Result<Ile> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(constraint(format!("epsilon = {eps} outside (0, 1/4)")));
    }
    let eight_pi = 2.0 * FOUR_PI;
    let full = region.integrate(|a, b| {
        let r = grid.r(a, b);
        let (lv, lu) = weighted_null_derivatives(grid, st, a, b);
        let psi2 = st.psi[grid.idx(a, b)].norm_sqr();
        let dens = 0.5 * (lv + lu) + psi2 / (1.0 + r).powi(2) + charge_term(grid, st, q0, chargeless, a, b);
        dens * (1.0 + r).powf(-1.0 - eps)
    });
    let angular = region.integrate(|a, b| charge_term(grid, st, q0, chargeless, a, b) / (1.0 + grid.r(a, b)));
    Ok(Ile { full: eight_pi * full, angular: eight_pi * angular })
}

/// `∫ |φ/(1+r)|² dσ` over the leaf divided by `E[φ](Σ_τ)`; 0 when the energy is 0.
pub fn hardy_ratio(grid: &NullGrid, st: &FieldState, leaf: &Leaf) -> f64 {
    let w = |a: usize, b: usize| st.psi[grid.idx(a, b)].norm_sqr() / (1.0 + grid.r(a, b)).powi(2);
    let lhs = leaf_integral(leaf, w, w).value;
    let e = scalar_energy_flux(grid, st, leaf).value;
    if e == 0.0 {
        0.0
    } else {
        lhs / e
    }
}

/// [`hardy_ratio`] with the radiation tail beyond the truncation completed.
///
/// On a cut cone `ψ → ψ_V` as `v → ∞`, so the missing energy is
/// `4π|ψ_V|²/r_V` and the missing left side is `4π|ψ_V|²/(1+r_V)` to leading
/// order. The raw ratio of a late leaf is dominated by the cut and grows without
/// bound as `v_max` grows; the completed one does not.
pub fn hardy_ratio_completed(grid: &NullGrid, st: &FieldState, leaf: &Leaf) -> f64 {
    let w = |a: usize, b: usize| st.psi[grid.idx(a, b)].norm_sqr() / (1.0 + grid.r(a, b)).powi(2);
    let &(a, b) = leaf.cone.points.last().expect("cones are never empty");
    let tail = FOUR_PI * st.psi[grid.idx(a, b)].norm_sqr();
    let rv = grid.r(a, b);
    let lhs = leaf_integral(leaf, w, w).value + tail / (1.0 + rv);
    let e = scalar_energy_flux(grid, st, leaf).value + tail / rv;
    if e == 0.0 {
        0.0
    } else {
        lhs / e
    }
}

/// Constant of the Hardy inequality on a leaf.
pub const HARDY_CONSTANT: f64 = 12.0;

pub fn hardy_check(grid: &NullGrid, st: &FieldState, leaf: &Leaf) -> (f64, bool) {
    let r = hardy_ratio(grid, st, leaf);
    (r, r <= HARDY_CONSTANT)
}

/// Charge along the top boundary `v = v_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeSeries {
    pub q0: f64,
    pub u: Vec<f64>,
    pub q: Vec<f64>,
    /// `q₀ - ∫ Im(ψ conj D_u ψ) du` from the bottom corner: the charge left
    /// after the outflow through `v = v_max`.
    pub q_expected: Vec<f64>,
    /// `max |q - q₀|`.
    pub drift_raw: f64,
    /// `max |q - q_expected|`.
    pub drift: f64,
}

impl ChargeSeries {
    pub fn relative_drift(&self) -> f64 {
        if self.q0 == 0.0 {
            self.drift
        } else {
            self.drift / self.q0.abs()
        }
    }
    pub fn relative_drift_raw(&self) -> f64 {
        if self.q0 == 0.0 {
            self.drift_raw
        } else {
            self.drift_raw / self.q0.abs()
        }
    }
}

/// Charge on `v = v_max` for rows `0..=last_row`.
pub fn charge_series(grid: &NullGrid, st: &FieldState, q0: f64, last_row: usize) -> ChargeSeries {
    let n = grid.n();
    let h = grid.h();
    let j = |a: usize| {
        let i = grid.idx(a, n);
        (st.psi[i] * st.du_psi[i].conj()).im
    };
    let mut out = ChargeSeries { q0, u: vec![], q: vec![], q_expected: vec![], drift_raw: 0.0, drift: 0.0 };
    let mut flux = NeumaierSum::new();
    for a in 0..=last_row.min(n) {
        if a > 0 {
            flux.add(0.5 * h * (j(a - 1) + j(a)));
        }
        let q = st.q[grid.idx(a, n)];
        let qe = q0 - flux.value();
        out.drift_raw = out.drift_raw.max((q - q0).abs());
        out.drift = out.drift.max((q - qe).abs());
        out.u.push(grid.u(a));
        out.q.push(q);
        out.q_expected.push(qe);
    }
    out
}

/// One leaf of a [`FluxReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub tau: f64,
    pub kind: LeafKind,
    pub r1: f64,
    pub e_flux_charged: f64,
    pub e_flux_chargeless: f64,
    /// Cone parts of the two fluxes; equal to the full ones on exterior leaves.
    pub e_cone_charged: f64,
    pub e_cone_chargeless: f64,
    pub w: Vec<f64>,
    /// `q` where the cone meets `v = v_max`.
    pub charge: f64,
    pub hardy_ratio: f64,
    pub hardy_ratio_completed: f64,
    pub truncation_radius: f64,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub p: Vec<f64>,
    pub leaves: Vec<LeafRecord>,
}

pub fn leaf_record(grid: &NullGrid, st: &FieldState, leaf: &Leaf, q0: f64, p: &[f64]) -> Result<LeafRecord> {
    let charged = energy_flux(grid, st, leaf, q0, false);
    let chargeless = energy_flux(grid, st, leaf, q0, true);
    let w = p.iter().map(|&p| weighted_flux(grid, st, leaf, p)).collect::<Result<Vec<_>>>()?;
    let &(a, b) = leaf.cone.points.last().expect("cones are never empty");
    Ok(LeafRecord {
        tau: leaf.tau,
        kind: leaf.kind,
        r1: leaf.r1,
        e_flux_charged: charged.value,
        e_flux_chargeless: chargeless.value,
        e_cone_charged: cone_energy_flux(grid, st, leaf, q0, false).value,
        e_cone_chargeless: cone_energy_flux(grid, st, leaf, q0, true).value,
        w,
        charge: st.q[grid.idx(a, b)],
        hardy_ratio: hardy_ratio(grid, st, leaf),
        hardy_ratio_completed: hardy_ratio_completed(grid, st, leaf),
        truncation_radius: leaf.truncation_radius,
        truncated: charged.truncated,
    })
}

/// Records for every leaf parameter in `taus`.
pub fn flux_report(grid: &NullGrid, st: &FieldState, q0: f64, taus: &[f64], p: &[f64]) -> Result<FluxReport> {
    let leaves = taus
        .iter()
        .map(|&tau| leaf_record(grid, st, &grid.leaf(tau)?, q0, p))
        .collect::<Result<Vec<_>>>()?;
    for rec in &leaves {
        let vals = [rec.e_flux_charged, rec.e_flux_chargeless, rec.hardy_ratio].into_iter().chain(rec.w.iter().copied());
        if vals.clone().any(|x| !x.is_finite()) || vals.clone().any(|x| x < 0.0) {
            return Err(Error::Numerical { u: 0.5 * (rec.tau - grid.big_r()), v: grid.v_max(), what: "invalid flux".into() });
        }
    }
    Ok(FluxReport { p: p.to_vec(), leaves })
}

fn w_column(p: f64) -> String {
    format!("W_{p}")
}

impl FluxReport {
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["tau", "kind", "r1", "E_flux_charged", "E_flux_chargeless", "E_cone_charged", "E_cone_chargeless"].iter().map(|s| s.to_string()).collect();
        h.extend(self.p.iter().map(|&p| w_column(p)));
        h.extend(["charge", "hardy_ratio", "hardy_ratio_completed", "truncation_radius", "truncated"].iter().map(|s| s.to_string()));
        h
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "{}", self.header().join(","))?;
        for l in &self.leaves {
            let kind = match l.kind {
                LeafKind::Interior => "interior",
                LeafKind::Exterior => "exterior",
            };
            write!(
                w,
                "{:e},{kind},{:e},{:e},{:e},{:e},{:e}",
                l.tau, l.r1, l.e_flux_charged, l.e_flux_chargeless, l.e_cone_charged, l.e_cone_chargeless
            )?;
            for x in &l.w {
                write!(w, ",{x:e}")?;
            }
            writeln!(w, ",{:e},{:e},{:e},{:e},{}", l.charge, l.hardy_ratio, l.hardy_ratio_completed, l.truncation_radius, l.truncated as u8)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Values of one column, by header name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let pick: Box<dyn Fn(&LeafRecord) -> f64> = match name {
            "tau" => Box::new(|l| l.tau),
            "r1" => Box::new(|l| l.r1),
            "E_flux_charged" => Box::new(|l| l.e_flux_charged),
            "E_flux_chargeless" => Box::new(|l| l.e_flux_chargeless),
            "E_cone_charged" => Box::new(|l| l.e_cone_charged),
            "E_cone_chargeless" => Box::new(|l| l.e_cone_chargeless),
            "charge" => Box::new(|l| l.charge),
            "hardy_ratio" => Box::new(|l| l.hardy_ratio),
            "hardy_ratio_completed" => Box::new(|l| l.hardy_ratio_completed),
            "truncation_radius" => Box::new(|l| l.truncation_radius),
            _ => {
                let k = self.p.iter().position(|&p| w_column(p) == name)?;
                Box::new(move |l| l.w[k])
            }
        };
        Some(self.leaves.iter().map(pick).collect())
    }
}

/// A generic numeric CSV table: header plus columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read_csv(path: &Path) -> Result<Self> {
        let r = BufReader::new(std::fs::File::open(path)?);
        let mut lines = r.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Format(format!("{}: empty file", path.display())))??
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let mut rows = vec![];
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            rows.push(line.split(',').map(|s| s.trim().to_string()).collect());
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing column {name}")))?;
        self.rows
            .iter()
            .map(|r| {
                r.get(k)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::Format(format!("bad value in column {name}")))
            })
            .collect()
    }
}

/// Least-squares fit of `log Q` against `log(1+τ)` plus a boundedness test of
/// `Q (1+τ)^{-e}` over the window, where `e` is the hypothesised exponent
/// (`e = -(1+γ)` for the energy flux, `p - 1 - γ` for `W_p`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub quantity: String,
    pub exponent: f64,
    pub window: [f64; 2],
    pub leaves: usize,
    pub excluded_nonpositive: usize,
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log-log residuals.
    pub residual: f64,
    /// `sup Q (1+τ)^{-e}` over the window.
    pub boundedness: f64,
    /// `Q (1+τ)^{-e}` at the first leaf of the window.
    pub at_start: f64,
    /// `boundedness / at_start`.
    pub ratio: f64,
    pub bound_factor: f64,
    pub pass: bool,
}

pub fn fit_decay(quantity: &str, tau: &[f64], q: &[f64], exponent: f64, window: [f64; 2], bound_factor: f64) -> Result<DecayFit> {
    if tau.len() != q.len() {
        return Err(constraint("tau and value columns differ in length"));
    }
    if !(window[0] < window[1]) {
        return Err(range(format!("empty window [{}, {}]", window[0], window[1])));
    }
    let mut excluded = 0;
    let mut pts = vec![];
    for (&t, &y) in tau.iter().zip(q) {
        if t < window[0] || t > window[1] {
            continue;
        }
        if y > 0.0 && y.is_finite() {
            pts.push((t, y));
        } else {
            excluded += 1;
        }
    }
    if pts.len() < 8 {
        return Err(range(format!("window [{}, {}] holds {} usable leaves; need at least 8", window[0], window[1], pts.len())));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let xs: Vec<f64> = pts.iter().map(|p| (1.0 + p.0).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = crate::sum::sum(xs.iter().copied()) / m;
    let my = crate::sum::sum(ys.iter().copied()) / m;
    let sxy = crate::sum::sum(xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)));
    let sxx = crate::sum::sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (crate::sum::sum(xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2))) / m).sqrt();
    let scaled: Vec<f64> = pts.iter().map(|&(t, y)| y * (1.0 + t).powf(-exponent)).collect();
    let boundedness = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let at_start = scaled[0];
    let ratio = boundedness / at_start;
    Ok(DecayFit {
        quantity: quantity.to_string(),
        exponent,
        window,
        leaves: pts.len(),
        excluded_nonpositive: excluded,
        slope,
        intercept,
        residual,
        boundedness,
        at_start,
        ratio,
        bound_factor,
        pass: ratio <= bound_factor,
    })
}

/// Energy bookkeeping between two interior leaves with `F̃ = F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBalance {
    pub e1: f64,
    pub e2: f64,
    /// Energy leaving through `v = v_max` between the two cones.
    pub outflow: f64,
    /// `E(Σ_τ₂) + outflow - E(Σ_τ₁)`.
    pub residual: f64,
}

pub fn energy_balance(grid: &NullGrid, st: &FieldState, tau1: f64, tau2: f64, q0: f64) -> Result<EnergyBalance> {
    if !(0.0 <= tau1 && tau1 < tau2) {
        return Err(range("energy balance needs 0 <= tau1 < tau2"));
    }
    let l1 = grid.leaf(tau1)?;
    let l2 = grid.leaf(tau2)?;
    let e1 = energy_flux(grid, st, &l1, q0, false).value;
    let e2 = energy_flux(grid, st, &l2, q0, false).value;
    let outflow = incoming_flux(grid, st, l1.row, l2.row, q0, false);
    Ok(EnergyBalance { e1, e2, outflow, residual: e2 + outflow - e1 })
}

/// Largest increase of the interior energy flux between consecutive leaves.
pub fn max_energy_increase(report: &FluxReport) -> f64 {
    report
        .leaves
        .windows(2)
        .filter(|w| w[0].kind == LeafKind::Interior && w[1].kind == LeafKind::Interior)
        .map(|w| w[1].e_flux_charged - w[0].e_flux_charged)
        .fold(0.0, f64::max)
}

/// Decay of the exterior cone flux in `r₁ = R - τ`.
///
/// `sup r₁^{1+γ₀} E(S_{r₁})` over the exterior leaves against its value on the
/// first interior cone (`r₁ = R`), for the chargeless and the raw field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExteriorBound {
    pub exponent: f64,
    pub leaves: usize,
    pub r1_max: f64,
    pub chargeless_ratio: f64,
    pub raw_ratio: f64,
    pub bound_factor: f64,
    /// The chargeless ratio is within the bound.
    pub pass: bool,
    /// The raw ratio is not.
    pub raw_exceeds: bool,
}

/// Needs the `τ = 0` leaf and at least one exterior leaf in `report`.
pub fn exterior_bound(report: &FluxReport, gamma0: f64, bound_factor: f64) -> Result<ExteriorBound> {
    let base = report
        .leaves
        .iter()
        .find(|l| l.tau == 0.0)
        .ok_or_else(|| range("exterior bound needs the tau = 0 leaf"))?;
    let ext: Vec<&LeafRecord> = report.leaves.iter().filter(|l| l.kind == LeafKind::Exterior).collect();
    if ext.is_empty() {
        return Err(range("exterior bound needs exterior leaves"));
    }
    let e = 1.0 + gamma0;
    let scaled = |l: &LeafRecord, chargeless: bool| {
        let v = if chargeless { l.e_cone_chargeless } else { l.e_cone_charged };
        l.r1.powf(e) * v
    };
    let ratio = |chargeless: bool| {
        let b = scaled(base, chargeless);
        let sup = ext.iter().map(|l| scaled(l, chargeless)).fold(b, f64::max);
        if b == 0.0 {
            if sup == 0.0 { 1.0 } else { f64::INFINITY }
        } else {
            sup / b
        }
    };
    let (chargeless_ratio, raw_ratio) = (ratio(true), ratio(false));
    Ok(ExteriorBound {
        exponent: e,
        leaves: ext.len(),
        r1_max: ext.iter().map(|l| l.r1).fold(base.r1, f64::max),
        chargeless_ratio,
        raw_ratio,
        bound_factor,
        pass: chargeless_ratio <= bound_factor,
        raw_exceeds: raw_ratio > bound_factor,
    })
}
