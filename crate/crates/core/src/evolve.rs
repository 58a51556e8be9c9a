//! Characteristic (diamond) integrator for the reduced system in the gauge `A_v = 0`:
//!
//! ```text
//! (W)  ∂_u∂_v ψ = -i A_u ∂_v ψ + i (q/r²) ψ
//! (G)  ∂_v A_u  = -2 q/r²
//! (Qv) ∂_v q    =  Im(ψ conj ∂_v ψ)
//! (Qu) ∂_u q    = -Im(ψ conj D_u ψ)
//! ```
//!
//! plus the transport `∂_v ζ = -i (q/r²) ψ` of `ζ = D_u ψ`. Rows of constant `u`
//! are marched in increasing `u`; within a row, `ψ` is advanced cell by cell and
//! `q`, `A_u`, `ζ` are prefix integrals from the row start. (Qu) is never used
//! for marching; it is a residual.
//!
//! The cell update transports the lower row into the upper one with the link
//! `U = exp(-i h Ā_u)`, so a residual gauge map `χ(u)` enters only through
//! `U` and is reproduced exactly when `χ` is quadratic.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{constraint, Error, Result};
use crate::fields::FieldState;
use crate::initdata::InitialSlice;
use crate::nullgrid::NullGrid;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Startup {
    /// Second-order Taylor expansion in `t` off the Cauchy diagonal.
    Taylor2,
    /// d'Alembert's formula for `∂_t²ψ = ∂_r²ψ` plus the coupling terms to `O(h³)`.
    #[default]
    #[serde(rename = "dalembert")]
    DAlembert,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    /// Corrector passes after the predictor; at least 1.
    pub correctors: usize,
    pub startup: Startup,
    /// Rows between intermediate checkpoints; 0 disables them.
    pub checkpoint_cadence: usize,
    /// Coefficient of the fourth-difference filter along rows; `None` is off.
    pub dissipation: Option<f64>,
    /// Abort when `max |ψ|` on a row exceeds this multiple of its initial value.
    pub growth_limit: f64,
    /// Last row (index `a`) to march; rows above stay untouched. Lets Coulomb
    /// runs stop short of the axis.
    pub row_limit: Option<usize>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            correctors: 1,
            startup: Startup::DAlembert,
            checkpoint_cadence: 0,
            dissipation: None,
            growth_limit: 1e6,
            row_limit: None,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.correctors < 1 {
            return Err(constraint("corrector iterations must be >= 1"));
        }
        if let Some(d) = self.dissipation {
            if !(0.0..=1.0).contains(&d) {
                return Err(constraint("dissipation coefficient must lie in [0, 1]"));
            }
        }
        if !(self.growth_limit > 1.0) {
            return Err(constraint("growth limit must exceed 1"));
        }
        Ok(())
    }
}

/// Values at one corner of a cell.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Node {
    pub psi: Complex64,
    pub a_u: f64,
    pub q: f64,
}

/// One step of (Qv) and (G) along a row, from `W` at radius `r_w` to `N` at `r_n`.
///
/// `q` uses the midpoint rule, `Im(ψ_m conj(ψ_N - ψ_W)) = Im(ψ_W conj ψ_N)`.
/// `A_u` integrates `q/r²` exactly for `q` linear in `r`, hence exactly for Coulomb.
pub fn charge_potential_step(q_w: f64, a_w: f64, psi_w: Complex64, psi_n: Complex64, r_w: f64, r_n: f64) -> (f64, f64) {
    let q_n = q_w + (psi_w * psi_n.conj()).im;
    let dr = r_n - r_w;
    let a_n = if r_w == 0.0 {
        a_w - dr * q_n / (r_n * r_n)
    } else {
        let x = dr / r_w;
        let beta = (q_n - q_w) / dr;
        a_w - 2.0 * (q_w * dr / (r_w * r_n) + beta * (x.ln_1p() - x / (1.0 + x)))
    };
    (q_n, a_n)
}

/// Trapezoid step of `∂_v ζ = -i (q/r²) ψ`.
pub fn zeta_step(zeta_w: Complex64, w: Node, n: Node, r_w: f64, r_n: f64) -> Complex64 {
    let rho = |q: f64, r: f64| if r == 0.0 { 0.0 } else { q / (r * r) };
    zeta_w - I * (0.5 * (r_n - r_w)) * (rho(w.q, r_w) * w.psi + rho(n.q, r_n) * n.psi)
}

/// `(q, A_u, ζ)` at `N` from their values at `W` and `ψ` at both points.
#[allow(clippy::too_many_arguments)]
pub fn prefix_step(
    q_w: f64,
    a_w: f64,
    zeta_w: Complex64,
    psi_w: Complex64,
    psi_n: Complex64,
    r_w: f64,
    r_n: f64,
    _h: f64,
) -> (f64, f64, Complex64) {
    let (q_n, a_n) = charge_potential_step(q_w, a_w, psi_w, psi_n, r_w, r_n);
    let zeta = zeta_step(
        zeta_w,
        Node { psi: psi_w, a_u: a_w, q: q_w },
        Node { psi: psi_n, a_u: a_n, q: q_n },
        r_w,
        r_n,
    );
    (q_n, a_n, zeta)
}

/// Advance one diamond cell: corners `S = (u-h, v-h)`, `E = (u-h, v)`, `W = (u, v-h)`
/// give `N = (u, v)`. `r_w` is the radius at `W`; `r_N = r_w + h`.
///
/// `ψ_N = ψ_W + U(ψ_E - ψ_S) + i h² ρ_c ψ_c`, with `U = exp(-i h Ā_u)`,
/// `ψ_c = ¼(ψ_W + ψ_N + U(ψ_E + ψ_S))` and `ρ_c = q̄/r_N²`; bars are corner means.
/// `ψ_N` is solved for exactly at fixed `(Ā_u, q̄)`; the predictor extrapolates
/// `A_u`, `q` bilinearly and each corrector recomputes them from (G), (Qv).
pub fn step_cell(s: Node, e: Node, w: Node, r_w: f64, h: f64, correctors: usize) -> Node {
    let r_n = r_w + h;
    let mut n = Node { psi: w.psi, a_u: w.a_u + e.a_u - s.a_u, q: w.q + e.q - s.q };
    for _ in 0..=correctors {
        let theta = 0.25 * h * (s.a_u + e.a_u + w.a_u + n.a_u);
        let u = Complex64::from_polar(1.0, -theta);
        let k4 = I * (0.0625 * h * h * (s.q + e.q + w.q + n.q) / (r_n * r_n));
        let psi = (w.psi + u * (e.psi - s.psi) + k4 * (w.psi + u * (e.psi + s.psi))) / (1.0 - k4);
        let (q, a_u) = charge_potential_step(w.q, w.a_u, w.psi, psi, r_w, r_n);
        n = Node { psi, a_u, q };
    }
    n
}

fn node(grid: &NullGrid, st: &FieldState, a: usize, b: usize) -> Node {
    let i = grid.idx(a, b);
    Node { psi: st.psi[i], a_u: st.a_u[i], q: st.q[i] }
}

/// Startup state: Cauchy diagonal and `t = h` diagonal filled from the slice.
pub fn startup(grid: &NullGrid, slice: &InitialSlice, method: Startup) -> FieldState {
    let mut st = FieldState::zeros(grid);
    slice.to_characteristic(grid, &mut st, method);
    st
}

/// Index of the last marched row and the rows' first marched column.
fn marched_rows(grid: &NullGrid, config: &EvolveConfig) -> usize {
    config.row_limit.unwrap_or(grid.n()).min(grid.n())
}

/// March a startup state over the domain.
///
/// Rows with `u < 0` must have their Cauchy and `t = h` points filled; rows
/// starting on the axis read `A_u` there from `state` (zero unless a gauge map
/// put something else) and set `ψ = q = 0`.
pub fn march(grid: &NullGrid, state: FieldState, config: &EvolveConfig) -> Result<FieldState> {
    march_with(grid, state, config, |_, _| Ok(()))
}

/// [`march`] with a hook called after each completed row.
pub fn march_with(
    grid: &NullGrid,
    mut st: FieldState,
    config: &EvolveConfig,
    mut on_row: impl FnMut(usize, &FieldState) -> Result<()>,
) -> Result<FieldState> {
    config.validate()?;
    let n = grid.n();
    let h = grid.h();
    let half = n / 2;
    let last = marched_rows(grid, config);
    let scale = (0..=half)
        .map(|a| st.psi[grid.idx(a, n - a)].norm())
        .fold(0.0, f64::max);
    for a in 1..=last {
        let bs = grid.row_start(a);
        let first = if a > half {
            let i = grid.idx(a, a);
            st.psi[i] = Complex64::new(0.0, 0.0);
            st.q[i] = 0.0;
            a + 1
        } else {
            bs + 2
        };
        for b in first..=n {
            let sn = node(grid, &st, a - 1, b - 1);
            let en = node(grid, &st, a - 1, b);
            let wn = node(grid, &st, a, b - 1);
            let nn = step_cell(sn, en, wn, grid.r(a, b - 1), h, config.correctors);
            if !(nn.psi.re.is_finite() && nn.psi.im.is_finite() && nn.a_u.is_finite() && nn.q.is_finite()) {
                return Err(Error::Numerical { u: grid.u(a), v: grid.v(b), what: "non-finite value".into() });
            }
            let i = grid.idx(a, b);
            st.psi[i] = nn.psi;
            st.a_u[i] = nn.a_u;
            st.q[i] = nn.q;
        }
        if let Some(eps) = config.dissipation {
            filter_row(grid, &mut st, a, first, eps);
        }
        fill_zeta(grid, &mut st, a);
        if scale > 0.0 {
            let (bmax, m) = (bs..=n)
                .map(|b| (b, st.psi[grid.idx(a, b)].norm()))
                .fold((bs, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if m > config.growth_limit * scale {
                return Err(Error::Numerical {
                    u: grid.u(a),
                    v: grid.v(bmax),
                    what: format!("|psi| grew to {m:e}, beyond {} x its initial maximum", config.growth_limit),
                });
            }
        }
        on_row(a, &st)?;
    }
    Ok(st)
}

/// Fourth-difference filter on the marched part of row `a`, then the prefix
/// integrals are redone so (G) and (Qv) still hold along the row.
fn filter_row(grid: &NullGrid, st: &mut FieldState, a: usize, first: usize, eps: f64) {
    let n = grid.n();
    let lo = first.max(grid.row_start(a) + 2);
    if n < lo + 2 {
        return;
    }
    let old: Vec<Complex64> = (0..=n).map(|b| if b >= grid.row_start(a) { st.psi[grid.idx(a, b)] } else { Complex64::new(0.0, 0.0) }).collect();
    for b in lo..=n - 2 {
        let d4 = old[b - 2] - 4.0 * old[b - 1] + 6.0 * old[b] - 4.0 * old[b + 1] + old[b + 2];
        st.psi[grid.idx(a, b)] = old[b] - (eps / 16.0) * d4;
    }
    for b in first..=n {
        let w = grid.idx(a, b - 1);
        let i = grid.idx(a, b);
        let (q, au) = charge_potential_step(st.q[w], st.a_u[w], st.psi[w], st.psi[i], grid.r(a, b - 1), grid.r(a, b));
        st.q[i] = q;
        st.a_u[i] = au;
    }
}

/// `ζ` along row `a`: on the axis `ζ = ∂_u ψ = -∂_v ψ` (because `ψ(u, u) = 0`),
/// at a Cauchy point it is kept, and it is transported from there.
fn fill_zeta(grid: &NullGrid, st: &mut FieldState, a: usize) {
    let n = grid.n();
    let h = grid.h();
    let bs = grid.row_start(a);
    if grid.is_axis(a, bs) && !grid.is_cauchy(a, bs) {
        let p = |k: usize| st.psi[grid.idx(a, bs + k)];
        let z = match n - bs {
            0 => Complex64::new(0.0, 0.0),
            1 => -(p(1) - p(0)) / h,
            2 | 3 => -(4.0 * p(1) - 3.0 * p(0) - p(2)) / (2.0 * h),
            _ => -(-25.0 * p(0) + 48.0 * p(1) - 36.0 * p(2) + 16.0 * p(3) - 3.0 * p(4)) / (12.0 * h),
        };
        st.du_psi[grid.idx(a, bs)] = z;
    }
    for b in bs + 1..=n {
        let w = grid.idx(a, b - 1);
        let i = grid.idx(a, b);
        st.du_psi[i] = zeta_step(st.du_psi[w], node(grid, st, a, b - 1), node(grid, st, a, b), grid.r(a, b - 1), grid.r(a, b));
    }
}

/// Build startup rows from a slice and march them.
pub fn evolve(grid: &NullGrid, slice: &InitialSlice, config: &EvolveConfig) -> Result<FieldState> {
    march(grid, startup(grid, slice, config.startup), config)
}

/// Max-norm residuals of the evolved state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CovariantResidual {
    /// `D_t²ψ - D_r²ψ`, i.e. `r □_A φ`, by covariant central differences of step `2h`.
    pub wave: f64,
    /// Null components of `∂^ν F_{μν} - J_μ`, with `r² E_r` rebuilt from `A_u` alone.
    pub maxwell: f64,
    /// `∂_u q + Im(ψ conj D_u ψ)` between adjacent rows.
    pub qu: f64,
    /// `ζ - (∂_u ψ + i A_u ψ)` with the `u`-derivative differenced covariantly.
    pub zeta: f64,
}

impl CovariantResidual {
    fn max(self, o: Self) -> Self {
        Self {
            wave: self.wave.max(o.wave),
            maxwell: self.maxwell.max(o.maxwell),
            qu: self.qu.max(o.qu),
            zeta: self.zeta.max(o.zeta),
        }
    }
}

/// One row of the residual log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowResidual {
    pub u: f64,
    #[serde(flatten)]
    pub res: CovariantResidual,
}

/// `r² E_r` between `(a, b)` and `(a, b+1)`, from (G) with `q` constant on the step.
fn q_half(grid: &NullGrid, st: &FieldState, a: usize, b: usize) -> f64 {
    let (r0, r1) = (grid.r(a, b), grid.r(a, b + 1));
    -r0 * r1 * (st.a_u[grid.idx(a, b + 1)] - st.a_u[grid.idx(a, b)]) / (2.0 * (r1 - r0))
}

fn j_u(grid: &NullGrid, st: &FieldState, a: usize, b: usize) -> f64 {
    let i = grid.idx(a, b);
    (st.psi[i] * st.du_psi[i].conj()).im
}

fn row_residual(grid: &NullGrid, st: &FieldState, a: usize, last: usize) -> CovariantResidual {
    let n = grid.n();
    let h = grid.h();
    let bs = grid.row_start(a);
    let ok = |aa: usize, bb: usize| aa <= last && grid.contains(aa, bb);
    let mut res = CovariantResidual::default();
    for b in bs..=n {
        let i = grid.idx(a, b);
        if a >= 1 && ok(a - 1, b) {
            let dq = (st.q[i] - st.q[grid.idx(a - 1, b)]) / h;
            res.qu = res.qu.max((dq + 0.5 * (j_u(grid, st, a, b) + j_u(grid, st, a - 1, b))).abs());
        }
        if b > bs && b < n {
            let dq = (q_half(grid, st, a, b) - q_half(grid, st, a, b - 1)) / h;
            let dpsi = (st.psi[grid.idx(a, b + 1)] - st.psi[grid.idx(a, b - 1)]) / (2.0 * h);
            res.maxwell = res.maxwell.max((dq - (st.psi[i] * dpsi.conj()).im).abs());
        }
        if b < n && a >= 1 && ok(a - 1, b) && ok(a + 1, b) && ok(a - 1, b + 1) && ok(a + 1, b + 1) {
            let dq = (q_half(grid, st, a + 1, b) - q_half(grid, st, a - 1, b)) / (2.0 * h);
            let j = 0.5 * (j_u(grid, st, a, b) + j_u(grid, st, a, b + 1));
            res.maxwell = res.maxwell.max((dq + j).abs());
        }
        if a >= 1 && ok(a - 1, b) && ok(a + 1, b) {
            let link = |k: usize| {
                let th = 0.5 * h * (st.a_u[i] + st.a_u[grid.idx(k, b)]);
                if k > a {
                    Complex64::from_polar(1.0, th)
                } else {
                    Complex64::from_polar(1.0, -th)
                }
            };
            let d = (link(a + 1) * st.psi[grid.idx(a + 1, b)] - link(a - 1) * st.psi[grid.idx(a - 1, b)]) / (2.0 * h);
            res.zeta = res.zeta.max((st.du_psi[i] - d).norm());
        }
        if a >= 1 && b >= 1 && b < n && ok(a + 1, b + 1) && ok(a - 1, b - 1) && ok(a - 1, b + 1) && ok(a + 1, b - 1) {
            // Along t the neighbours are (a±1, b±1), along r they are (a∓1, b±1).
            // A_t = A_u/2 and A_r = -A_u/2; each link carries the mean over its ends.
            let dd = 2.0 * h;
            let at = |aa: usize, bb: usize| 0.5 * st.a_u[grid.idx(aa, bb)];
            let here = at(a, b);
            let second = |pa: usize, pb: usize, ma: usize, mb: usize, sign: f64| {
                let tp = sign * 0.5 * dd * (here + at(pa, pb));
                let tm = sign * 0.5 * dd * (here + at(ma, mb));
                (Complex64::from_polar(1.0, tp) * st.psi[grid.idx(pa, pb)] - 2.0 * st.psi[i]
                    + Complex64::from_polar(1.0, -tm) * st.psi[grid.idx(ma, mb)])
                    / (dd * dd)
            };
            let dtt = second(a + 1, b + 1, a - 1, b - 1, 1.0);
            let drr = second(a - 1, b + 1, a + 1, b - 1, -1.0);
            res.wave = res.wave.max((dtt - drr).norm());
        }
    }
    res
}

/// Residual log, one entry per marched row.
pub fn residual_log(grid: &NullGrid, st: &FieldState, last_row: usize) -> Vec<RowResidual> {
    (0..=last_row.min(grid.n()))
        .map(|a| RowResidual { u: grid.u(a), res: row_residual(grid, st, a, last_row) })
        .collect()
}

/// Max-norm residuals over rows `0..=last_row`.
pub fn covariant_residual(grid: &NullGrid, st: &FieldState, last_row: usize) -> CovariantResidual {
    residual_log(grid, st, last_row).into_iter().fold(CovariantResidual::default(), |m, r| m.max(r.res))
}

pub fn write_residual_log(path: &Path, log: &[RowResidual]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "u,wave,maxwell,qu,zeta")?;
    for r in log {
        writeln!(w, "{:e},{:e},{:e},{:e},{:e}", r.u, r.res.wave, r.res.maxwell, r.res.qu, r.res.zeta)?;
    }
    w.flush()?;
    Ok(())
}
