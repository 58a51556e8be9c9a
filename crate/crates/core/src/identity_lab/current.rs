//! Pointwise energy-momentum tensor, modified current `J̃^X`, its divergence
//! identity, and the hypersurface contraction formulas.
//!
//! Conventions: `D = ∂ + iA`, `F = dA`, `J_μ = Im(φ conj D_μφ)`,
//! `π^X_{μν} = ½(∂_μX_ν + ∂_νX_μ)`, `dvol = dx∧dt = -dt∧dx`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::jet::{PointJet, M4, V4, ETA};
use super::multiplier::{Triple, TripleAt};
use crate::fields::{null_decompose, Frame, NullDecomposition};

/// Gauge-covariant data at one point.
#[derive(Clone, Copy, Debug)]
pub struct Local {
    pub x: V4,
    pub r: f64,
    pub phi: Complex64,
    /// `D_μ φ`.
    pub dphi: [Complex64; 4],
    /// `□_A φ = D^μ D_μ φ`.
    pub box_a: Complex64,
    /// `∂_μ |φ|²`.
    pub d_abs2: V4,
    pub f: M4,
    pub ft: M4,
    /// `∂^μ F̃_{μγ}`.
    pub div_ft: V4,
    /// `J_μ`.
    pub j: V4,
}

impl Local {
    pub fn new(p: &PointJet) -> Self {
        let i = Complex64::i();
        let (phi, a) = (p.phi.v, &p.a);
        let dphi: [Complex64; 4] = std::array::from_fn(|m| p.phi.d[m] + i * a.v[m] * phi);
        let mut box_a = Complex64::new(0.0, 0.0);
        for m in 0..4 {
            let d_dm = p.phi.dd[m][m] + i * a.d[m][m] * phi + i * a.v[m] * p.phi.d[m];
            box_a += ETA[m] * (d_dm + i * a.v[m] * dphi[m]);
        }
        let d_abs2 = std::array::from_fn(|m| 2.0 * (phi.conj() * p.phi.d[m]).re);
        let dft = p.a_tilde.curl_gradient();
        let div_ft = std::array::from_fn(|g| (0..4).map(|m| ETA[m] * dft[m][m][g]).sum());
        let j = std::array::from_fn(|m| (phi * dphi[m].conj()).im);
        let x = p.x;
        Self {
            x,
            r: (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt(),
            phi,
            dphi,
            box_a,
            d_abs2,
            f: a.curl(),
            ft: p.a_tilde.curl(),
            div_ft,
            j,
        }
    }

    pub fn abs2(&self) -> f64 {
        self.phi.norm_sqr()
    }

    /// `conj(D^μφ) D_μφ`.
    pub fn dphi_sq(&self) -> f64 {
        (0..4).map(|m| ETA[m] * self.dphi[m].norm_sqr()).sum()
    }

    pub fn frame(&self) -> Frame {
        Frame::at([self.x[1], self.x[2], self.x[3]])
    }

    /// `D_V φ` along a vector.
    pub fn d_along(&self, v: &V4) -> Complex64 {
        (0..4).map(|m| v[m] * self.dphi[m]).sum()
    }
}

fn f_sq(f: &M4) -> f64 {
    let mut s = 0.0;
    for m in 0..4 {
        for n in 0..4 {
            s += ETA[m] * ETA[n] * f[m][n] * f[m][n];
        }
    }
    s
}

/// `T[φ, F̃]_{αβ}` from `D_μφ` and `F̃_{μν}`.
pub fn emt(dphi: &[Complex64; 4], ft: &M4) -> M4 {
    let fsq = f_sq(ft);
    let dsq: f64 = (0..4).map(|m| ETA[m] * dphi[m].norm_sqr()).sum();
    let mut t = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut s: f64 = (0..4).map(|m| ETA[m] * ft[a][m] * ft[b][m]).sum();
            s += (dphi[a].conj() * dphi[b]).re;
            if a == b {
                s -= ETA[a] * (0.25 * fsq + 0.5 * dsq);
            }
            t[a][b] = s;
        }
    }
    t
}

/// `J̃^X_μ` (lower index).
pub fn current(loc: &Local, tr: &TripleAt) -> V4 {
    let t = emt(&loc.dphi, &loc.ft);
    let phi2 = loc.abs2();
    let y = y_upper(loc, tr);
    std::array::from_fn(|m| {
        let tx: f64 = (0..4).map(|n| t[m][n] * tr.x[n]).sum();
        tx - 0.5 * tr.dchi[m] * phi2 + 0.5 * tr.chi * loc.d_abs2[m] + ETA[m] * y[m]
    })
}

/// Raise an index.
pub fn up(w: &V4) -> V4 {
    std::array::from_fn(|m| ETA[m] * w[m])
}

fn radial(loc: &Local) -> [f64; 3] {
    [loc.x[1] / loc.r, loc.x[2] / loc.r, loc.x[3] / loc.r]
}

/// `L^μ = (1, ω)`; zero at the axis, where the triples using it are never evaluated.
fn l_vec(loc: &Local) -> V4 {
    if loc.r == 0.0 {
        return [0.0; 4];
    }
    let n = radial(loc);
    [1.0, n[0], n[1], n[2]]
}

fn y_upper(loc: &Local, tr: &TripleAt) -> V4 {
    if tr.y_coef == 0.0 {
        return [0.0; 4];
    }
    let l = l_vec(loc);
    std::array::from_fn(|m| tr.y_coef * loc.abs2() * l[m])
}

/// `div Y` for `Y = g(r)|φ|² L`: `g'|φ|² + g L|φ|² + 2g|φ|²/r`.
fn div_y(loc: &Local, tr: &TripleAt) -> f64 {
    if tr.y_coef == 0.0 {
        return 0.0;
    }
    let l = l_vec(loc);
    let l_abs2: f64 = (0..4).map(|m| l[m] * loc.d_abs2[m]).sum();
    tr.y_coef_r * loc.abs2() + tr.y_coef * l_abs2 + 2.0 * tr.y_coef * loc.abs2() / loc.r
}

/// `T^{μν} π_{μν}`.
fn t_dot_pi(t: &M4, tr: &TripleAt) -> f64 {
    let mut s = 0.0;
    for m in 0..4 {
        for n in 0..4 {
            // π_{mn} = ½(η_n ∂_m X^n + η_m ∂_n X^m)
            let pi = 0.5 * (ETA[n] * tr.dx[m][n] + ETA[m] * tr.dx[n][m]);
            s += ETA[m] * ETA[n] * t[m][n] * pi;
        }
    }
    s
}

/// `X^ν G_{νμ} J^μ`.
fn x_g_j(x: &V4, g: &M4, j: &V4) -> f64 {
    let mut s = 0.0;
    for n in 0..4 {
        for m in 0..4 {
            s += x[n] * g[n][m] * ETA[m] * j[m];
        }
    }
    s
}

/// Right side of the divergence identity for `J̃^X`, sources included.
pub fn divergence_rhs(loc: &Local, tr: &TripleAt) -> f64 {
    let t = emt(&loc.dphi, &loc.ft);
    let dx = loc.d_along(&tr.x);
    let src = (loc.box_a * (dx.conj() + tr.chi * loc.phi.conj())).re;
    let mut maxwell = 0.0;
    for n in 0..4 {
        for g in 0..4 {
            maxwell += loc.div_ft[g] * ETA[g] * loc.ft[n][g] * tr.x[n];
        }
    }
    src + div_y(loc, tr) + x_g_j(&tr.x, &loc.f, &loc.j) + maxwell + t_dot_pi(&t, tr) + tr.chi * loc.dphi_sq()
        - 0.5 * tr.box_chi * loc.abs2()
}

/// Bulk integrand of the energy identity once the equations are imposed:
/// `div Y + X^ν(F - F̃)_{νμ}J^μ + T·π + χ|Dφ|² - ½□χ|φ|²`.
pub fn bulk_generic(loc: &Local, tr: &TripleAt) -> f64 {
    let t = emt(&loc.dphi, &loc.ft);
    let mut diff = loc.f;
    for m in 0..4 {
        for n in 0..4 {
            diff[m][n] -= loc.ft[m][n];
        }
    }
    div_y(loc, tr) + x_g_j(&tr.x, &diff, &loc.j) + t_dot_pi(&t, tr) + tr.chi * loc.dphi_sq() - 0.5 * tr.box_chi * loc.abs2()
}

/// Null-frame pieces used by the closed forms.
#[derive(Clone, Copy, Debug)]
pub struct FramePieces {
    pub frame: Frame,
    pub nd: NullDecomposition,
    pub d_l: Complex64,
    pub d_lb: Complex64,
    pub d_t: Complex64,
    pub d_r: Complex64,
    /// `|D̸φ|²`.
    pub d_ang2: f64,
    /// `D_L ψ` for `ψ = rφ`.
    pub d_l_psi: Complex64,
}

impl FramePieces {
    pub fn new(loc: &Local) -> Self {
        let frame = loc.frame();
        let nd = null_decompose(&loc.ft, &frame).expect("Frame::at is orthonormal");
        let [l, lb, e1, e2] = frame.null_vectors();
        let d_l = loc.d_along(&l);
        let n = radial(loc);
        Self {
            frame,
            nd,
            d_l,
            d_lb: loc.d_along(&lb),
            d_t: loc.dphi[0],
            d_r: loc.d_along(&[0.0, n[0], n[1], n[2]]),
            d_ang2: loc.d_along(&e1).norm_sqr() + loc.d_along(&e2).norm_sqr(),
            d_l_psi: loc.phi + loc.r * d_l,
        }
    }

    pub fn alpha2(&self) -> f64 {
        self.nd.alpha[0].powi(2) + self.nd.alpha[1].powi(2)
    }

    pub fn alpha_bar2(&self) -> f64 {
        self.nd.alpha_bar[0].powi(2) + self.nd.alpha_bar[1].powi(2)
    }
}

/// Value and magnitude scale (sum of absolute term sizes) of a closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluated {
    pub value: f64,
    pub scale: f64,
}

fn eval(terms: &[f64]) -> Evaluated {
    Evaluated { value: terms.iter().sum(), scale: terms.iter().map(|x| x.abs()).sum() }
}

/// The closed form of [`bulk_generic`] for a named triple.
pub fn bulk_closed(loc: &Local, triple: &Triple, tr: &TripleAt) -> Evaluated {
    let mut diff = loc.f;
    for m in 0..4 {
        for n in 0..4 {
            diff[m][n] -= loc.ft[m][n];
        }
    }
    let err = x_g_j(&tr.x, &diff, &loc.j);
    match *triple {
        Triple::Time => eval(&[err]),
        Triple::Rp { p } => {
            let fp = FramePieces::new(loc);
            let r = loc.r;
            let r2 = r * r;
            let c = 0.5 * r.powf(p - 3.0);
            let rho2 = fp.nd.rho.powi(2);
            let sigma2 = fp.nd.sigma.powi(2);
            eval(&[
                c * p * fp.d_l_psi.norm_sqr(),
                c * p * r2 * fp.alpha2(),
                c * (2.0 - p) * r2 * fp.d_ang2,
                c * (2.0 - p) * r2 * rho2,
                c * (2.0 - p) * r2 * sigma2,
                err,
            ])
        }
        Triple::Morawetz(w) => {
            let fp = FramePieces::new(loc);
            let r = loc.r;
            let [f, f1, f2] = w.f(r);
            let ang = f / r - 0.5 * f1;
            eval(&[
                0.5 * f1 * fp.d_t.norm_sqr(),
                0.5 * f1 * fp.d_r.norm_sqr(),
                0.25 * f1 * fp.alpha2(),
                0.25 * f1 * fp.alpha_bar2(),
                ang * fp.d_ang2,
                ang * fp.nd.rho.powi(2),
                ang * fp.nd.sigma.powi(2),
                -0.5 * f2 / r * loc.abs2(),
                err,
            ])
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    /// `t = const`, measure `dx`.
    Slice,
    /// `u = const`, measure `r² dv dω`.
    Outgoing,
    /// `v = const`, measure `r² du dω`.
    Incoming,
    /// `r = const`, measure `dt dω`.
    Cylinder,
}

impl SurfaceKind {
    pub const ALL: [SurfaceKind; 4] = [Self::Slice, Self::Outgoing, Self::Incoming, Self::Cylinder];
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn det4(m: [V4; 4]) -> f64 {
    (0..4)
        .map(|c| {
            let minor = std::array::from_fn(|i| {
                let row = m[i + 1];
                let mut k = 0;
                let mut out = [0.0; 3];
                for (j, &x) in row.iter().enumerate() {
                    if j != c {
                        out[k] = x;
                        k += 1;
                    }
                }
                out
            });
            let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][c] * det3(minor)
        })
        .sum()
}

/// `i_J dvol` evaluated on the surface's oriented unit tangents, as a density
/// against the surface measure of `kind`. With `dvol = -dt∧dx∧dy∧dz` in
/// `(t, x, y, z)` order this is `-det[J; V₁; V₂; V₃]`.
///
/// Tangents: slice `(∂_x, ∂_y, ∂_z)`; outgoing `(L, e₁, e₂)`; incoming
/// `(L̄, e₁, e₂)`; cylinder `(∂_t, e₁, e₂)` with the `r²` of `r² dω` folded in.
pub fn contraction(j_lower: &V4, kind: SurfaceKind, loc: &Local) -> f64 {
    let ju = up(j_lower);
    let rows = |a: V4, b: V4, c: V4| -det4([ju, a, b, c]);
    match kind {
        SurfaceKind::Slice => rows([0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]),
        _ => {
            let [l, lb, e1, e2] = loc.frame().null_vectors();
            match kind {
                SurfaceKind::Outgoing => rows(l, e1, e2),
                SurfaceKind::Incoming => rows(lb, e1, e2),
                SurfaceKind::Cylinder => loc.r * loc.r * rows([1.0, 0.0, 0.0, 0.0], e1, e2),
                SurfaceKind::Slice => unreachable!(),
            }
        }
    }
}

/// The bracket shared by the three contraction formulas, for the component
/// of upper index `N` picked out by the covector `nu` (`nu_μ V^μ = V^N`):
/// `Re(conj(D^Nφ) D_Xφ) - ½X^N|Dφ|² - ½∂^Nχ|φ|² + ½χ∂^N|φ|² + Y^N
///  + F̃^{Nμ}F̃_{νμ}X^ν - ¼X^N F̃²`.
fn bracket(loc: &Local, tr: &TripleAt, nu: &V4) -> Evaluated {
    let raise = |w: &dyn Fn(usize) -> f64| -> f64 { (0..4).map(|m| nu[m] * ETA[m] * w(m)).sum() };
    let d_up = (0..4).map(|m| nu[m] * ETA[m] * loc.dphi[m]).sum::<Complex64>();
    let x_n: f64 = (0..4).map(|m| nu[m] * tr.x[m]).sum();
    let y = y_upper(loc, tr);
    let y_n: f64 = (0..4).map(|m| nu[m] * y[m]).sum();
    let mut ff = 0.0;
    for a in 0..4 {
        for m in 0..4 {
            let ft_up = nu[a] * ETA[a] * ETA[m] * loc.ft[a][m];
            for n in 0..4 {
                ff += ft_up * loc.ft[n][m] * tr.x[n];
            }
        }
    }
    let phi2 = loc.abs2();
    eval(&[
        (d_up.conj() * loc.d_along(&tr.x)).re,
        -0.5 * x_n * loc.dphi_sq(),
        -0.5 * raise(&|m| tr.dchi[m]) * phi2,
        0.5 * tr.chi * raise(&|m| loc.d_abs2[m]),
        y_n,
        ff,
        -0.25 * x_n * f_sq(&loc.ft),
    ])
}

fn scaled(e: Evaluated, k: f64) -> Evaluated {
    Evaluated { value: k * e.value, scale: k.abs() * e.scale }
}

/// The displayed contraction formula for `kind`, transcribed literally;
/// `None` for the cylinder, which has no generic formula.
pub fn closed_contraction(loc: &Local, tr: &TripleAt, kind: SurfaceKind) -> Option<Evaluated> {
    match kind {
        SurfaceKind::Slice => Some(scaled(bracket(loc, tr, &[1.0, 0.0, 0.0, 0.0]), -1.0)),
        SurfaceKind::Cylinder => None,
        SurfaceKind::Outgoing | SurfaceKind::Incoming => {
            let [l, lb, _, _] = loc.frame().null_vectors();
            // V^{L̄} = -½ m(V, L), V^L = -½ m(V, L̄).
            let (dual, sign) = if kind == SurfaceKind::Outgoing { (l, -2.0) } else { (lb, 2.0) };
            let nu = std::array::from_fn(|m| -0.5 * ETA[m] * dual[m]);
            Some(scaled(bracket(loc, tr, &nu), sign))
        }
    }
}

/// The triple-specific flux formulas, each returned with the factor `k` such
/// that the formula equals `k ·` [`contraction`]. `None` where no closed formula exists.
pub fn closed_flux(loc: &Local, triple: &Triple, kind: SurfaceKind) -> Option<(Evaluated, f64)> {
    let fp = FramePieces::new(loc);
    let (rho2, sigma2) = (fp.nd.rho.powi(2), fp.nd.sigma.powi(2));
    let (a2, ab2) = (fp.alpha2(), fp.alpha_bar2());
    let phi2 = loc.abs2();
    let r = loc.r;
    let r2 = r * r;
    let [l, lb, _, _] = fp.frame.null_vectors();
    let dir = |v: &V4| -> f64 { (0..4).map(|m| v[m] * loc.d_abs2[m]).sum() };
    match *triple {
        Triple::Time => match kind {
            SurfaceKind::Outgoing => Some((eval(&[fp.d_l.norm_sqr(), fp.d_ang2, rho2, a2, sigma2]), 2.0)),
            // The energy through an incoming cone is counted with the opposite
            // orientation to the contraction formula's `r² du dω`.
            SurfaceKind::Incoming => Some((eval(&[fp.d_lb.norm_sqr(), fp.d_ang2, rho2, ab2, sigma2]), -2.0)),
            SurfaceKind::Slice => {
                let grad: f64 = loc.dphi.iter().map(|d| d.norm_sqr()).sum();
                Some((eval(&[grad, rho2, sigma2, 0.5 * a2, 0.5 * ab2]), 2.0))
            }
            SurfaceKind::Cylinder => None,
        },
        Triple::Rp { p } => {
            let rp = r.powf(p);
            let rp1 = r.powf(p + 1.0);
            let dpsi2 = fp.d_l_psi.norm_sqr();
            let ang_psi = r2 * fp.d_ang2;
            // L(r^{p+1}|φ|²), L̄(...), ∂_r(...), ∂_t(...)
            let l_g = (p + 1.0) * rp * phi2 + rp1 * dir(&l);
            let lb_g = -(p + 1.0) * rp * phi2 + rp1 * dir(&lb);
            let n = radial(loc);
            let r_g = (p + 1.0) * rp * phi2 + rp1 * dir(&[0.0, n[0], n[1], n[2]]);
            let t_g = rp1 * loc.d_abs2[0];
            match kind {
                SurfaceKind::Outgoing => Some((eval(&[rp * dpsi2, rp * r2 * a2, -0.5 * l_g]), r2)),
                SurfaceKind::Incoming => Some((eval(&[-rp * ang_psi, -rp * r2 * rho2, -rp * r2 * sigma2, -0.5 * lb_g]), r2)),
                SurfaceKind::Slice => Some((
                    eval(&[
                        0.5 * rp * dpsi2,
                        0.5 * rp * ang_psi,
                        0.5 * rp * r2 * a2,
                        0.5 * rp * r2 * rho2,
                        0.5 * rp * r2 * sigma2,
                        -0.5 * r_g,
                    ]),
                    r2,
                )),
                SurfaceKind::Cylinder => Some((
                    eval(&[
                        0.5 * rp * dpsi2,
                        -0.5 * rp * ang_psi,
                        0.5 * rp * r2 * a2,
                        -0.5 * rp * r2 * rho2,
                        -0.5 * rp * r2 * sigma2,
                        -0.5 * t_g,
                    ]),
                    1.0,
                )),
            }
        }
        Triple::Morawetz(w) => {
            let [f, f1, _] = w.f(r);
            let chi = f / r;
            let chi_r = f1 / r - f / r2;
            match kind {
                SurfaceKind::Outgoing => Some((
                    eval(&[
                        0.5 * f * fp.d_l.norm_sqr(),
                        -0.5 * f * fp.d_ang2,
                        -0.5 * f * rho2,
                        0.5 * f * a2,
                        -0.5 * f * sigma2,
                        -0.5 * chi_r * phi2,
                        chi * (fp.d_l * loc.phi.conj()).re,
                    ]),
                    1.0,
                )),
                SurfaceKind::Incoming => Some((
                    eval(&[
                        0.5 * f * fp.d_lb.norm_sqr(),
                        -0.5 * f * fp.d_ang2,
                        -0.5 * f * rho2,
                        0.5 * f * ab2,
                        -0.5 * f * sigma2,
                        -0.5 * chi_r * phi2,
                        -chi * (fp.d_lb * loc.phi.conj()).re,
                    ]),
                    1.0,
                )),
                SurfaceKind::Slice => Some((
                    eval(&[f * (fp.d_t.conj() * (fp.d_r + loc.phi / r)).re, 0.25 * f * a2, -0.25 * f * ab2]),
                    1.0,
                )),
                SurfaceKind::Cylinder => None,
            }
        }
    }
}
