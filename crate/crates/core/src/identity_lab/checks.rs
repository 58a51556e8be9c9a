//! The identity checks on synthetic fields and their aggregation into a report.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::current::{bulk_closed, bulk_generic, contraction, current, divergence_rhs, closed_contraction, closed_flux, Local, SurfaceKind};
use super::jet::{SyntheticField, V4, ETA};
use super::multiplier::{standard_triples, Triple};
use crate::error::{constraint, range, Result};

/// A coordinate box in `(t, x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabBox {
    pub lo: V4,
    pub hi: V4,
}

impl Default for LabBox {
    fn default() -> Self {
        Self { lo: [0.0, 1.0, -0.5, 0.2], hi: [1.0, 2.0, 0.5, 1.2] }
    }
}

impl LabBox {
    /// Smallest spatial radius in the box.
    pub fn min_radius(&self) -> f64 {
        let d = |i: usize| {
            if self.lo[i] <= 0.0 && self.hi[i] >= 0.0 {
                0.0
            } else {
                self.lo[i].abs().min(self.hi[i].abs())
            }
        };
        (d(1).powi(2) + d(2).powi(2) + d(3).powi(2)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if (0..4).any(|i| !(self.lo[i] < self.hi[i])) {
            return Err(range("lab box needs lo < hi in every coordinate"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabConfig {
    pub seeds: Vec<u64>,
    /// Modes per field component.
    pub modes: usize,
    /// Largest wavenumber component.
    pub kmax: f64,
    pub lab_box: LabBox,
    /// Inner cutoff for the triples singular at `r = 0`.
    pub r_min: f64,
    /// Finite-difference steps, coarse to fine.
    pub steps: Vec<f64>,
    /// Test points per seed for the divergence residual.
    pub fd_points: usize,
    /// Random points for the algebraic checks.
    pub algebra_points: usize,
    pub eps: f64,
    pub r1: f64,
    pub p_list: Vec<f64>,
    /// Gauss cells per dimension for the box Stokes check, coarse to fine.
    pub stokes_cells: Vec<usize>,
    pub order_threshold: f64,
    pub algebra_tolerance: f64,
    pub gauge_tolerance: f64,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            seeds: vec![1, 2, 3],
            modes: 3,
            kmax: 1.0,
            lab_box: LabBox::default(),
            r_min: 0.5,
            steps: vec![0.1, 0.05, 0.025],
            fd_points: 32,
            algebra_points: 1000,
            eps: 0.1,
            r1: 3.0,
            p_list: vec![0.0, 0.5, 1.0, 1.8, 2.0],
            stokes_cells: vec![1, 2, 4],
            order_threshold: 3.5,
            algebra_tolerance: 1e-12,
            gauge_tolerance: 1e-10,
        }
    }
}

impl LabConfig {
    pub fn triples(&self) -> Vec<Triple> {
        let mut v: Vec<Triple> = standard_triples(self.eps, self.r1).into_iter().filter(|t| !matches!(t, Triple::Rp { .. })).collect();
        v.extend(self.p_list.iter().map(|&p| Triple::Rp { p }));
        v
    }

    pub fn validate(&self) -> Result<()> {
        self.lab_box.validate()?;
        for t in self.triples() {
            t.validate()?;
        }
        if self.steps.len() < 3 || self.stokes_cells.len() < 3 {
            return Err(constraint("identity checks need at least three levels"));
        }
        if self.steps.windows(2).any(|w| !(w[1] < w[0])) || self.steps.iter().any(|&h| !(h > 0.0)) {
            return Err(constraint("finite-difference steps must be positive and decreasing"));
        }
        if self.stokes_cells.windows(2).any(|w| w[1] <= w[0]) || self.stokes_cells[0] == 0 {
            return Err(constraint("Stokes cell counts must be positive and increasing"));
        }
        if !(self.r_min > 0.0) {
            return Err(constraint("r_min must be positive"));
        }
        let reach = 2.0 * self.steps[0];
        if self.lab_box.min_radius() - reach < self.r_min {
            return Err(range(format!(
                "lab box reaches r = {} with the stencil, inside the cutoff r_min = {}",
                self.lab_box.min_radius() - reach,
                self.r_min
            )));
        }
        Ok(())
    }

    pub fn field(&self, seed: u64) -> SyntheticField {
        SyntheticField::random(seed, self.modes, self.kmax)
    }
}

/// Uniform random points in the box.
pub fn sample_points(b: &LabBox, n: usize, seed: u64) -> Vec<V4> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_f491_4f6c_dd1d).wrapping_add(7));
    (0..n).map(|_| std::array::from_fn(|i| rng.gen_range(b.lo[i]..=b.hi[i]))).collect()
}

fn current_at(field: &SyntheticField, triple: &Triple, x: &V4) -> V4 {
    current(&Local::new(&field.at(x)), &triple.at(x))
}

/// Numerical `∂^μ J̃_μ` at `x` by fourth-order central differences.
pub fn numeric_divergence(field: &SyntheticField, triple: &Triple, x: &V4, h: f64) -> f64 {
    (0..4)
        .map(|m| {
            let at = |k: f64| {
                let mut y = *x;
                y[m] += k * h;
                current_at(field, triple, &y)[m]
            };
            ETA[m] * (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
        })
        .sum()
}

/// Max over `points` of `|numeric div J̃ - analytic right side|`.
pub fn divergence_residual(field: &SyntheticField, triple: &Triple, h: f64, points: &[V4]) -> f64 {
    points
        .iter()
        .map(|x| {
            let rhs = divergence_rhs(&Local::new(&field.at(x)), &triple.at(x));
            (numeric_divergence(field, triple, x, h) - rhs).abs()
        })
        .fold(0.0, f64::max)
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    let s = scale.max(a.abs()).max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Generic bulk integrand against its closed form: max relative gap.
pub fn bulk_closed_forms(field: &SyntheticField, triple: &Triple, points: &[V4]) -> f64 {
    points
        .iter()
        .map(|x| {
            let loc = Local::new(&field.at(x));
            let tr = triple.at(x);
            let c = bulk_closed(&loc, triple, &tr);
            rel(bulk_generic(&loc, &tr), c.value, c.scale)
        })
        .fold(0.0, f64::max)
}

/// Per surface kind: max relative gap between the generic contraction and the
/// displayed formula (`generic`), and the triple-specific flux formula (`flux`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGaps {
    pub generic: BTreeMap<SurfaceKind, f64>,
    pub flux: BTreeMap<SurfaceKind, f64>,
}

impl BoundaryGaps {
    pub fn max(&self) -> f64 {
        self.generic.values().chain(self.flux.values()).fold(0.0, |a, &b| a.max(b))
    }
}

pub fn boundary_formulas(field: &SyntheticField, triple: &Triple, points: &[V4]) -> BoundaryGaps {
    let mut out = BoundaryGaps::default();
    for x in points {
        let loc = Local::new(&field.at(x));
        let tr = triple.at(x);
        let j = current(&loc, &tr);
        for kind in SurfaceKind::ALL {
            let g = contraction(&j, kind, &loc);
            if let Some(p) = closed_contraction(&loc, &tr, kind) {
                let e = out.generic.entry(kind).or_insert(0.0);
                *e = e.max(rel(g, p.value, p.scale));
            }
            if let Some((p, k)) = closed_flux(&loc, triple, kind) {
                let e = out.flux.entry(kind).or_insert(0.0);
                *e = e.max(rel(k * g, p.value, p.scale));
            }
        }
    }
    out
}

const GAUSS2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

/// Composite two-point Gauss nodes and weights on `[lo, hi]`.
fn gauss_nodes(lo: f64, hi: f64, cells: usize) -> Vec<(f64, f64)> {
    let w = (hi - lo) / cells as f64;
    (0..cells)
        .flat_map(|c| {
            let mid = lo + (c as f64 + 0.5) * w;
            GAUSS2.map(|g| (mid + 0.5 * w * g, 0.5 * w))
        })
        .collect()
}

/// Bulk integral of the divergence identity's right side over a box, the
/// boundary integral of `J̃` and their difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Closure {
    pub bulk: f64,
    pub boundary: f64,
    pub residual: f64,
}

pub fn stokes_check(field: &SyntheticField, triple: &Triple, b: &LabBox, cells: usize) -> Closure {
    let nodes: Vec<Vec<(f64, f64)>> = (0..4).map(|i| gauss_nodes(b.lo[i], b.hi[i], cells)).collect();
    let mut bulk = crate::sum::NeumaierSum::new();
    for &(t, wt) in &nodes[0] {
        for &(x, wx) in &nodes[1] {
            for &(y, wy) in &nodes[2] {
                for &(z, wz) in &nodes[3] {
                    let p = [t, x, y, z];
                    bulk.add(wt * wx * wy * wz * divergence_rhs(&Local::new(&field.at(&p)), &triple.at(&p)));
                }
            }
        }
    }
    // ∫ ∂_μ J̃^μ = Σ_μ ∫ [J̃^μ]_{lo_μ}^{hi_μ} over the other three coordinates.
    let mut boundary = crate::sum::NeumaierSum::new();
    for m in 0..4 {
        let others: Vec<usize> = (0..4).filter(|&i| i != m).collect();
        for &(a, wa) in &nodes[others[0]] {
            for &(c, wc) in &nodes[others[1]] {
                for &(d, wd) in &nodes[others[2]] {
                    for (edge, sign) in [(b.hi[m], 1.0), (b.lo[m], -1.0)] {
                        let mut p = [0.0; 4];
                        p[m] = edge;
                        p[others[0]] = a;
                        p[others[1]] = c;
                        p[others[2]] = d;
                        boundary.add(sign * wa * wc * wd * ETA[m] * current_at(field, triple, &p)[m]);
                    }
                }
            }
        }
    }
    let (bulk, boundary) = (bulk.value(), boundary.value());
    Closure { bulk, boundary, residual: bulk - boundary }
}

/// `log2` ratios of consecutive errors under halving; `None` when an error is 0.
pub fn observed_orders(errors: &[f64]) -> Vec<Option<f64>> {
    errors
        .windows(2)
        .map(|w| if w[0] > 0.0 && w[1] > 0.0 { Some((w[0] / w[1]).log2()) } else { None })
        .collect()
}

/// Pass when every defined order clears the threshold; all-zero errors are exact.
fn orders_pass(errors: &[f64], orders: &[Option<f64>], threshold: f64) -> bool {
    if errors.iter().all(|&e| e == 0.0) {
        return true;
    }
    orders.iter().all(|o| o.is_some_and(|o| o >= threshold))
}

/// Cyclic sum `∂_k F̃_{mn} + ∂_m F̃_{nk} + ∂_n F̃_{km}`, maximised over points and indices.
pub fn bianchi_residual(field: &SyntheticField, points: &[V4]) -> f64 {
    let mut worst: f64 = 0.0;
    for x in points {
        let g = field.a_tilde.jet(x).curl_gradient();
        for k in 0..4 {
            for m in 0..4 {
                for n in 0..4 {
                    worst = worst.max((g[k][m][n] + g[m][n][k] + g[n][k][m]).abs());
                }
            }
        }
    }
    worst
}

/// Largest relative change of every pointwise lab output under `(φ, A) → (e^{iχ}φ, A - dχ)`.
pub fn gauge_invariance(field: &SyntheticField, gauged: &SyntheticField, triples: &[Triple], points: &[V4]) -> f64 {
    let mut worst: f64 = 0.0;
    for x in points {
        let (l0, l1) = (Local::new(&field.at(x)), Local::new(&gauged.at(x)));
        for t in triples {
            let tr = t.at(x);
            let (j0, j1) = (current(&l0, &tr), current(&l1, &tr));
            let scale = j0.iter().map(|v| v.abs()).sum::<f64>();
            for m in 0..4 {
                worst = worst.max(rel(j0[m], j1[m], scale));
            }
            let c0 = bulk_closed(&l0, t, &tr);
            worst = worst.max(rel(divergence_rhs(&l0, &tr), divergence_rhs(&l1, &tr), c0.scale));
            worst = worst.max(rel(bulk_generic(&l0, &tr), bulk_generic(&l1, &tr), c0.scale));
            worst = worst.max(rel(c0.value, bulk_closed(&l1, t, &tr).value, c0.scale));
            for kind in SurfaceKind::ALL {
                worst = worst.max(rel(contraction(&j0, kind, &l0), contraction(&j1, kind, &l1), scale));
            }
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleReport {
    pub triple: Triple,
    pub name: String,
    pub steps: Vec<f64>,
    /// Max over seeds of the divergence residual, per step.
    pub divergence_residual: Vec<f64>,
    pub divergence_orders: Vec<Option<f64>>,
    pub divergence_pass: bool,
    pub closed_form_gap: f64,
    pub boundary: BoundaryGaps,
    pub algebra_pass: bool,
    pub stokes_cells: Vec<usize>,
    pub stokes_residual: Vec<f64>,
    pub stokes_orders: Vec<Option<f64>>,
    pub stokes_pass: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabReport {
    pub config: LabConfig,
    pub triples: Vec<TripleReport>,
    pub bianchi_residual: f64,
    pub gauge_change: f64,
    pub gauge_pass: bool,
    pub pass: bool,
}

pub fn run_lab(cfg: &LabConfig) -> Result<LabReport> {
    cfg.validate()?;
    let fields: Vec<SyntheticField> = cfg.seeds.iter().map(|&s| cfg.field(s)).collect();
    let fd_points: Vec<Vec<V4>> = cfg.seeds.iter().map(|&s| sample_points(&cfg.lab_box, cfg.fd_points, s)).collect();
    let per_seed = cfg.algebra_points.div_ceil(cfg.seeds.len().max(1));
    let alg_points: Vec<Vec<V4>> = cfg.seeds.iter().map(|&s| sample_points(&cfg.lab_box, per_seed, s ^ 0xabcdef)).collect();
    let triples = cfg.triples();

    let mut reports = Vec::new();
    for t in &triples {
        let divergence_residual: Vec<f64> = cfg
            .steps
            .iter()
            .map(|&h| fields.iter().zip(&fd_points).map(|(f, p)| divergence_residual(f, t, h, p)).fold(0.0, f64::max))
            .collect();
        let divergence_orders = observed_orders(&divergence_residual);
        let divergence_pass = orders_pass(&divergence_residual, &divergence_orders, cfg.order_threshold);

        let mut closed_form_gap: f64 = 0.0;
        let mut boundary = BoundaryGaps::default();
        for (f, p) in fields.iter().zip(&alg_points) {
            closed_form_gap = closed_form_gap.max(bulk_closed_forms(f, t, p));
            let b = boundary_formulas(f, t, p);
            for (k, v) in b.generic {
                let e = boundary.generic.entry(k).or_insert(0.0);
                *e = e.max(v);
            }
            for (k, v) in b.flux {
                let e = boundary.flux.entry(k).or_insert(0.0);
                *e = e.max(v);
            }
        }
        let algebra_pass = closed_form_gap <= cfg.algebra_tolerance && boundary.max() <= cfg.algebra_tolerance;

        let stokes_residual: Vec<f64> = cfg
            .stokes_cells
            .iter()
            .map(|&c| fields.iter().map(|f| stokes_check(f, t, &cfg.lab_box, c).residual.abs()).fold(0.0, f64::max))
            .collect();
        let stokes_orders = observed_orders(&stokes_residual);
        let stokes_pass = orders_pass(&stokes_residual, &stokes_orders, cfg.order_threshold);

        reports.push(TripleReport {
            triple: *t,
            name: t.name(),
            steps: cfg.steps.clone(),
            divergence_residual,
            divergence_orders,
            divergence_pass,
            closed_form_gap,
            boundary,
            algebra_pass,
            stokes_cells: cfg.stokes_cells.clone(),
            stokes_residual,
            stokes_orders,
            stokes_pass,
            pass: divergence_pass && algebra_pass && stokes_pass,
        });
    }

    let mut bianchi: f64 = 0.0;
    let mut gauge_change: f64 = 0.0;
    for ((f, p), &s) in fields.iter().zip(&alg_points).zip(&cfg.seeds) {
        bianchi = bianchi.max(bianchi_residual(f, p));
        let g = f.with_gauge(SyntheticField::random_gauge(s, cfg.modes, cfg.kmax));
        gauge_change = gauge_change.max(gauge_invariance(f, &g, &triples, &p[..p.len().min(200)]));
    }
    let gauge_pass = gauge_change <= cfg.gauge_tolerance;
    let pass = gauge_pass && bianchi <= 1e-12 && reports.iter().all(|r| r.pass);
    Ok(LabReport { config: cfg.clone(), triples: reports, bianchi_residual: bianchi, gauge_change, gauge_pass, pass })
}
