//! Gauge-fixed spherically symmetric state and the algebra around it.
//!
//! Gauge: `A_v = 0`, so `D_v = ∂_v` and `D_u = ∂_u + i A_u`. Besides `ψ = rφ`,
//! `A_u` and `q`, the state carries `ζ = D_u ψ`, transported along each row by
//! `∂_v ζ = -i ρ ψ`. Every quantity a diagnostic reads is then computed from
//! one row at a time, and a residual gauge map `χ(u)` multiplies a whole row by
//! one phase.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{constraint, Error, Result};
use crate::nullgrid::{GridSpec, NullGrid};

pub const CONVENTIONS_VERSION: &str = "mkg-conventions/1";

#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub psi: Vec<Complex64>,
    /// `ζ = D_u ψ`.
    pub du_psi: Vec<Complex64>,
    pub a_u: Vec<f64>,
    /// Charge inside radius `r`.
    pub q: Vec<f64>,
}

impl FieldState {
    pub fn zeros(grid: &NullGrid) -> Self {
        let n = grid.len();
        Self {
            psi: vec![Complex64::new(0.0, 0.0); n],
            du_psi: vec![Complex64::new(0.0, 0.0); n],
            a_u: vec![0.0; n],
            q: vec![0.0; n],
        }
    }

    /// Fill every field from closed-form functions of `(u, v)`.
    pub fn from_fn(
        grid: &NullGrid,
        mut f: impl FnMut(f64, f64) -> (Complex64, Complex64, f64, f64),
    ) -> Self {
        let mut s = Self::zeros(grid);
        for a in 0..=grid.n() {
            for b in grid.row_start(a)..=grid.n() {
                let i = grid.idx(a, b);
                let (psi, zeta, au, q) = f(grid.u(a), grid.v(b));
                s.psi[i] = psi;
                s.du_psi[i] = zeta;
                s.a_u[i] = au;
                s.q[i] = q;
            }
        }
        s
    }
}

/// `∂_v` of a grid function along row `a`, using points of that row only:
/// fourth-order central differences inside, fourth-order one-sided stencils at
/// the two ends, lower order only on rows shorter than five points.
pub fn dv_row<T>(grid: &NullGrid, f: &[T], a: usize, b: usize) -> T
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = grid.n();
    let bs = grid.row_start(a);
    if n - bs + 1 < 5 {
        return dv_row2(grid, f, a, b);
    }
    let c = 1.0 / (12.0 * grid.h());
    let at = |bb: usize| f[grid.idx(a, bb)];
    if b >= bs + 2 && b + 2 <= n {
        (at(b - 2) - at(b + 2) + (at(b + 1) - at(b - 1)) * 8.0) * c
    } else if b == bs {
        (at(b) * -25.0 + at(b + 1) * 48.0 - at(b + 2) * 36.0 + at(b + 3) * 16.0 - at(b + 4) * 3.0) * c
    } else if b == bs + 1 {
        (at(b - 1) * -3.0 - at(b) * 10.0 + at(b + 1) * 18.0 - at(b + 2) * 6.0 + at(b + 3)) * c
    } else if b == n {
        (at(b) * 25.0 - at(b - 1) * 48.0 + at(b - 2) * 36.0 - at(b - 3) * 16.0 + at(b - 4) * 3.0) * c
    } else {
        (at(b + 1) * 3.0 + at(b) * 10.0 - at(b - 1) * 18.0 + at(b - 2) * 6.0 - at(b - 3)) * c
    }
}

/// Second-order version of [`dv_row`]: central inside, three-point one-sided at the ends.
pub fn dv_row2<T>(grid: &NullGrid, f: &[T], a: usize, b: usize) -> T
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = grid.n();
    let bs = grid.row_start(a);
    let h = grid.h();
    let at = |bb: usize| f[grid.idx(a, bb)];
    let len = n - bs + 1;
    if len == 1 {
        return at(b) * 0.0;
    }
    if len == 2 {
        return (at(bs + 1) - at(bs)) * (1.0 / h);
    }
    if b == bs {
        (at(b + 1) * 4.0 - at(b) * 3.0 - at(b + 2)) * (0.5 / h)
    } else if b == n {
        (at(b) * 3.0 - at(b - 1) * 4.0 + at(b - 2)) * (0.5 / h)
    } else {
        (at(b + 1) - at(b - 1)) * (0.5 / h)
    }
}

/// `∂_u` of a grid function at `(a, b)` along the column `v = v_b`. Used only by
/// residual checks; diagnostics never difference across rows.
pub fn du_col<T>(grid: &NullGrid, f: &[T], a: usize, b: usize) -> Option<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let h = grid.h();
    let g = |aa: isize| grid.try_idx(aa, b as isize).map(|i| f[i]);
    let a = a as isize;
    match (g(a - 1), g(a + 1)) {
        (Some(m), Some(p)) => Some((p - m) * (0.5 / h)),
        (None, Some(p)) => g(a + 2).map(|pp| (p * 4.0 - f[grid.idx(a as usize, b)] * 3.0 - pp) * (0.5 / h)),
        (Some(m), None) => g(a - 2).map(|mm| (f[grid.idx(a as usize, b)] * 3.0 - m * 4.0 + mm) * (0.5 / h)),
        (None, None) => None,
    }
}

/// Pointwise derived quantities.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Derived {
    pub phi: Complex64,
    pub dv_psi: Complex64,
    pub du_psi: Complex64,
    /// `D_v φ`; zero on the axis.
    pub dv_phi: Complex64,
    /// `D_u φ`; zero on the axis.
    pub du_phi: Complex64,
    pub rho: f64,
}

/// `φ` on row `a`; on the axis by quadratic extrapolation along the row.
pub fn phi_at(grid: &NullGrid, state: &FieldState, a: usize, b: usize) -> Complex64 {
    let r = grid.r(a, b);
    if r > 0.0 {
        return state.psi[grid.idx(a, b)] / r;
    }
    let n = grid.n();
    let p = |k: usize| state.psi[grid.idx(a, a + k)] / (k as f64 * grid.h());
    match n - a {
        0 => Complex64::new(0.0, 0.0),
        1 => p(1),
        2 => p(1) * 2.0 - p(2),
        _ => p(1) * 3.0 - p(2) * 3.0 + p(3),
    }
}

pub fn derived(grid: &NullGrid, state: &FieldState, a: usize, b: usize) -> Derived {
    let i = grid.idx(a, b);
    let r = grid.r(a, b);
    let dv_psi = dv_row(grid, &state.psi, a, b);
    let du_psi = state.du_psi[i];
    let phi = phi_at(grid, state, a, b);
    if r == 0.0 {
        return Derived { phi, dv_psi, du_psi, ..Default::default() };
    }
    let psi = state.psi[i];
    Derived {
        phi,
        dv_psi,
        du_psi,
        dv_phi: (dv_psi - psi / r) / r,
        du_phi: (du_psi + psi / r) / r,
        rho: state.q[i] / (r * r),
    }
}

/// `r^2 |D_v φ|^2 = |D_v ψ - ψ/r|^2` and `r^2 |D_u φ|^2 = |ζ + ψ/r|^2`; zero on the axis.
pub fn weighted_null_derivatives(grid: &NullGrid, state: &FieldState, a: usize, b: usize) -> (f64, f64) {
    let r = grid.r(a, b);
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let i = grid.idx(a, b);
    let psi = state.psi[i];
    let dv = dv_row(grid, &state.psi, a, b);
    ((dv - psi / r).norm_sqr(), (state.du_psi[i] + psi / r).norm_sqr())
}

/// Charge-subtracted density `ρ̃ = (q - q₀ 1_{r > t+R}) / r^2`. Points with
/// `r <= t + R` belong to the interior region, where `ρ̃ = ρ` exactly.
#[derive(Clone, Debug)]
pub struct ChargeSplit {
    pub q0: f64,
    pub rho_tilde: Vec<f64>,
}

pub fn in_exterior(grid: &NullGrid, a: usize, _b: usize) -> bool {
    // r > t + R  <=>  -2u > R
    -2.0 * grid.u(a) > grid.big_r()
}

/// `q - q₀ 1_{r > t+R}`.
pub fn q_tilde(grid: &NullGrid, state: &FieldState, q0: f64, a: usize, b: usize) -> f64 {
    let q = state.q[grid.idx(a, b)];
    if in_exterior(grid, a, b) {
        q - q0
    } else {
        q
    }
}

pub fn charge_split(grid: &NullGrid, state: &FieldState, q0: f64) -> ChargeSplit {
    let mut rho_tilde = vec![0.0; grid.len()];
    for a in 0..=grid.n() {
        for b in grid.row_start(a)..=grid.n() {
            let r = grid.r(a, b);
            if r > 0.0 {
                rho_tilde[grid.idx(a, b)] = q_tilde(grid, state, q0, a, b) / (r * r);
            }
        }
    }
    ChargeSplit { q0, rho_tilde }
}

/// Max-norm residuals of
/// `r²|D_Lφ|² = |D_Lψ|² - L(r|φ|²)`, `r²|D̸φ|² = |D̸ψ|²`, `r²|D_L̄φ|² = |D_L̄ψ|² + L̄(r|φ|²)`.
///
/// Each side is differenced independently: the left from `φ`, the right from
/// `ψ` and `|ψ|²/r`, with `D_u` built from `∂_u` and `A_u` (not from `ζ`).
/// Evaluated at points with `r >= r_min` and full central stencils.
pub fn psi_identities_residual(grid: &NullGrid, state: &FieldState, r_min: f64) -> [f64; 3] {
    let n = grid.len();
    let mut phi = vec![Complex64::new(0.0, 0.0); n];
    let mut w = vec![0.0; n];
    for a in 0..=grid.n() {
        for b in grid.row_start(a)..=grid.n() {
            let i = grid.idx(a, b);
            let r = grid.r(a, b);
            if r > 0.0 {
                phi[i] = state.psi[i] / r;
                w[i] = state.psi[i].norm_sqr() / r;
            }
        }
    }
    let i_unit = Complex64::new(0.0, 1.0);
    let (mut e1, mut e3) = (0.0f64, 0.0f64);
    for a in 1..grid.n() {
        for b in grid.row_start(a) + 1..grid.n() {
            let r = grid.r(a, b);
            if r < r_min || !grid.contains(a - 1, b) || !grid.contains(a + 1, b) {
                continue;
            }
            let i = grid.idx(a, b);
            let au = state.a_u[i];
            let dv_phi = dv_row2(grid, &phi, a, b);
            let dv_psi = dv_row2(grid, &state.psi, a, b);
            let dv_w = dv_row2(grid, &w, a, b);
            e1 = e1.max((r * r * dv_phi.norm_sqr() - (dv_psi.norm_sqr() - dv_w)).abs());
            let (Some(du_phi), Some(du_psi), Some(du_w)) = (
                du_col(grid, &phi, a, b),
                du_col(grid, &state.psi, a, b),
                du_col(grid, &w, a, b),
            ) else {
                continue;
            };
            let cov_phi = du_phi + i_unit * au * phi[i];
            let cov_psi = du_psi + i_unit * au * state.psi[i];
            e3 = e3.max((r * r * cov_phi.norm_sqr() - (cov_psi.norm_sqr() + du_w)).abs());
        }
    }
    // Angular derivatives vanish identically in spherical symmetry.
    [e1, 0.0, e3]
}

/// Orthonormal frame on the sphere through a point: radial `ω` and tangent `e₁`, `e₂`.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub omega: [f64; 3],
    pub e1: [f64; 3],
    pub e2: [f64; 3],
}

fn dot3(x: [f64; 3], y: [f64; 3]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

impl Frame {
    /// Check orthonormality; angular vectors must be tangent to the sphere.
    pub fn validate(&self) -> Result<()> {
        let vs = [self.omega, self.e1, self.e2];
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot3(vs[i], vs[j]) - want).abs() > 1e-10 {
                    return Err(constraint("degenerate frame: not orthonormal"));
                }
            }
        }
        Ok(())
    }

    /// A right-handed frame at spatial point `x != 0`.
    pub fn at(x: [f64; 3]) -> Self {
        let r = dot3(x, x).sqrt();
        let omega = [x[0] / r, x[1] / r, x[2] / r];
        let seed = if omega[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
        let c = dot3(seed, omega);
        let mut e1 = [seed[0] - c * omega[0], seed[1] - c * omega[1], seed[2] - c * omega[2]];
        let m = dot3(e1, e1).sqrt();
        e1.iter_mut().for_each(|x| *x /= m);
        let e2 = [
            omega[1] * e1[2] - omega[2] * e1[1],
            omega[2] * e1[0] - omega[0] * e1[2],
            omega[0] * e1[1] - omega[1] * e1[0],
        ];
        Self { omega, e1, e2 }
    }

    /// Cartesian `(t, x, y, z)` components of `L`, `L̄`, `e₁`, `e₂`.
    pub fn null_vectors(&self) -> [[f64; 4]; 4] {
        let w = self.omega;
        [
            [1.0, w[0], w[1], w[2]],
            [1.0, -w[0], -w[1], -w[2]],
            [0.0, self.e1[0], self.e1[1], self.e1[2]],
            [0.0, self.e2[0], self.e2[1], self.e2[2]],
        ]
    }
}

/// Null components of a 2-form: `α_A = F(L, e_A)`, `ᾱ_A = F(L̄, e_A)`,
/// `ρ = ½ F(L̄, L)`, `σ = F(e₁, e₂)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NullDecomposition {
    pub alpha: [f64; 2],
    pub alpha_bar: [f64; 2],
    pub rho: f64,
    pub sigma: f64,
}

fn form_apply(f: &[[f64; 4]; 4], x: [f64; 4], y: [f64; 4]) -> f64 {
    let mut s = 0.0;
    for m in 0..4 {
        for n in 0..4 {
            s += f[m][n] * x[m] * y[n];
        }
    }
    s
}

/// Decompose lower-index components `F_{μν}` in `(t, x, y, z)`.
pub fn null_decompose(f: &[[f64; 4]; 4], frame: &Frame) -> Result<NullDecomposition> {
    frame.validate()?;
    let [l, lb, e1, e2] = frame.null_vectors();
    Ok(NullDecomposition {
        alpha: [form_apply(f, l, e1), form_apply(f, l, e2)],
        alpha_bar: [form_apply(f, lb, e1), form_apply(f, lb, e2)],
        rho: 0.5 * form_apply(f, lb, l),
        sigma: form_apply(f, e1, e2),
    })
}

impl NullDecomposition {
    /// Inverse of [`null_decompose`].
    pub fn reconstruct(&self, frame: &Frame) -> [[f64; 4]; 4] {
        // Components in the orthonormal basis (∂_t, ω, e₁, e₂).
        let mut g = [[0.0; 4]; 4];
        let mut set = |i: usize, j: usize, x: f64| {
            g[i][j] = x;
            g[j][i] = -x;
        };
        set(0, 1, self.rho);
        set(0, 2, 0.5 * (self.alpha[0] + self.alpha_bar[0]));
        set(0, 3, 0.5 * (self.alpha[1] + self.alpha_bar[1]));
        set(1, 2, 0.5 * (self.alpha[0] - self.alpha_bar[0]));
        set(1, 3, 0.5 * (self.alpha[1] - self.alpha_bar[1]));
        set(2, 3, self.sigma);
        // Basis vectors' Cartesian components; the spatial triple is orthonormal.
        let basis = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, frame.omega[0], frame.omega[1], frame.omega[2]],
            [0.0, frame.e1[0], frame.e1[1], frame.e1[2]],
            [0.0, frame.e2[0], frame.e2[1], frame.e2[2]],
        ];
        let mut f = [[0.0; 4]; 4];
        for (m, fm) in f.iter_mut().enumerate() {
            for (n, fmn) in fm.iter_mut().enumerate() {
                let mut s = 0.0;
                for i in 0..4 {
                    for j in 0..4 {
                        s += g[i][j] * basis[i][m] * basis[j][n];
                    }
                }
                *fmn = s;
            }
        }
        f
    }

    /// `ρ² + σ² + ½(|α|² + |ᾱ|²)`.
    pub fn norm_sq(&self) -> f64 {
        let a2 = self.alpha[0].powi(2) + self.alpha[1].powi(2);
        let ab2 = self.alpha_bar[0].powi(2) + self.alpha_bar[1].powi(2);
        self.rho * self.rho + self.sigma * self.sigma + 0.5 * (a2 + ab2)
    }
}

/// `|E|² + |H|²` from Cartesian components, with `E_i = F_{0i}`.
pub fn electromagnetic_norm_sq(f: &[[f64; 4]; 4]) -> f64 {
    let e2 = f[0][1].powi(2) + f[0][2].powi(2) + f[0][3].powi(2);
    let h2 = f[1][2].powi(2) + f[1][3].powi(2) + f[2][3].powi(2);
    e2 + h2
}

type ScalarFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A gauge map `φ → e^{iχ}φ`, `A → A - dχ`.
pub struct GaugeMap {
    chi: ScalarFn,
    dchi_du: ScalarFn,
}

impl GaugeMap {
    /// A map depending on `u` only, the freedom left by `A_v = 0`.
    pub fn of_u(
        chi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dchi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { chi: Box::new(move |u, _| chi(u)), dchi_du: Box::new(move |u, _| dchi(u)) }
    }

    /// A general map of `(u, v)`; [`gauge_transform`] rejects it unless it is
    /// constant along every row.
    pub fn general(
        chi: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        dchi_du: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { chi: Box::new(chi), dchi_du: Box::new(dchi_du) }
    }

    pub fn chi(&self, u: f64, v: f64) -> f64 {
        (self.chi)(u, v)
    }
}

pub fn gauge_transform(grid: &NullGrid, state: &FieldState, map: &GaugeMap) -> Result<FieldState> {
    let mut out = state.clone();
    for a in 0..=grid.n() {
        let u = grid.u(a);
        let bs = grid.row_start(a);
        let chi0 = map.chi(u, grid.v(bs));
        let dchi = (map.dchi_du)(u, grid.v(bs));
        let phase = Complex64::from_polar(1.0, chi0);
        for b in bs..=grid.n() {
            let chi = map.chi(u, grid.v(b));
            if (chi - chi0).abs() > 1e-12 * (1.0 + chi0.abs()) {
                return Err(constraint(format!(
                    "gauge function depends on v at u = {u}; it would break A_v = 0"
                )));
            }
            let i = grid.idx(a, b);
            out.psi[i] = phase * state.psi[i];
            out.du_psi[i] = phase * state.du_psi[i];
            out.a_u[i] = state.a_u[i] - dchi;
        }
    }
    Ok(out)
}

/// Header of a checkpoint file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub conventions_version: String,
    pub grid: GridSpec,
    pub q0: f64,
    pub columns: Vec<String>,
    pub points: usize,
}

const MAGIC: &[u8; 8] = b"MKGCKPT1";
const COLUMNS: [&str; 8] = ["u", "v", "re_psi", "im_psi", "a_u", "q", "re_du_psi", "im_du_psi"];

impl CheckpointHeader {
    pub fn new(grid: &NullGrid, q0: f64) -> Self {
        Self {
            format: "mkg-checkpoint".into(),
            conventions_version: CONVENTIONS_VERSION.into(),
            grid: grid.spec(),
            q0,
            columns: COLUMNS.iter().map(|s| s.to_string()).collect(),
            points: grid.len(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckpointFormat {
    Binary,
    Csv,
}

fn records<'a>(grid: &'a NullGrid, state: &'a FieldState) -> impl Iterator<Item = [f64; 8]> + 'a {
    (0..=grid.n()).flat_map(move |a| {
        (grid.row_start(a)..=grid.n()).map(move |b| {
            let i = grid.idx(a, b);
            [
                grid.u(a),
                grid.v(b),
                state.psi[i].re,
                state.psi[i].im,
                state.a_u[i],
                state.q[i],
                state.du_psi[i].re,
                state.du_psi[i].im,
            ]
        })
    })
}

pub fn write_checkpoint(
    path: &Path,
    grid: &NullGrid,
    state: &FieldState,
    q0: f64,
    format: CheckpointFormat,
) -> Result<()> {
    let header = serde_json::to_string(&CheckpointHeader::new(grid, q0)).map_err(|e| Error::Format(e.to_string()))?;
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    match format {
        CheckpointFormat::Binary => {
            w.write_all(MAGIC)?;
            w.write_all(&(header.len() as u64).to_le_bytes())?;
            w.write_all(header.as_bytes())?;
            for rec in records(grid, state) {
                for x in rec {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
        }
        CheckpointFormat::Csv => {
            writeln!(w, "# {header}")?;
            writeln!(w, "{}", COLUMNS.join(","))?;
            for rec in records(grid, state) {
                let row: Vec<String> = rec.iter().map(|x| format!("{x:e}")).collect();
                writeln!(w, "{}", row.join(","))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a checkpoint in either format, detected from the first bytes.
pub fn read_checkpoint(path: &Path) -> Result<(CheckpointHeader, NullGrid, FieldState)> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    let bad = |m: &str| Error::Format(format!("{}: {m}", path.display()));
    let (header, rows): (CheckpointHeader, Vec<[f64; 8]>) = if &magic == MAGIC {
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let mut hbuf = vec![0u8; u64::from_le_bytes(len) as usize];
        r.read_exact(&mut hbuf)?;
        let header: CheckpointHeader = serde_json::from_slice(&hbuf).map_err(|e| bad(&e.to_string()))?;
        let mut rows = Vec::with_capacity(header.points);
        let mut buf = [0u8; 64];
        for _ in 0..header.points {
            r.read_exact(&mut buf)?;
            let mut rec = [0.0; 8];
            for (k, x) in rec.iter_mut().enumerate() {
                *x = f64::from_le_bytes(buf[8 * k..8 * k + 8].try_into().unwrap());
            }
            rows.push(rec);
        }
        (header, rows)
    } else {
        let mut first = String::from_utf8_lossy(&magic).into_owned();
        r.read_line(&mut first)?;
        let json = first.trim().strip_prefix("# ").ok_or_else(|| bad("missing JSON header"))?;
        let header: CheckpointHeader = serde_json::from_str(json).map_err(|e| bad(&e.to_string()))?;
        let mut lines = r.lines();
        lines.next();
        let mut rows = Vec::with_capacity(header.points);
        for line in lines {
            let line = line?;
            let mut rec = [0.0; 8];
            for (k, tok) in line.split(',').enumerate().take(8) {
                rec[k] = tok.parse().map_err(|_| bad("malformed number"))?;
            }
            rows.push(rec);
        }
        (header, rows)
    };
    let grid = NullGrid::new(header.grid)?;
    if rows.len() != grid.len() {
        return Err(bad("point count does not match grid"));
    }
    let mut state = FieldState::zeros(&grid);
    for (i, rec) in rows.iter().enumerate() {
        state.psi[i] = Complex64::new(rec[2], rec[3]);
        state.a_u[i] = rec[4];
        state.q[i] = rec[5];
        state.du_psi[i] = Complex64::new(rec[6], rec[7]);
    }
    Ok((header, grid, state))
}
