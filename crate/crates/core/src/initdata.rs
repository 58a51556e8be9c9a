//! Admissible Cauchy data on `t = 0` and the startup of the characteristic march.
//!
//! Data are given at the level of `ψ = rφ`: `ψ₀(r)` and `π₀(r) = r φ₁ = ∂_t ψ`.
//! The gauge is fixed by `A_u = 0` on `t = 0` (together with `A_v = 0`), so
//! `φ₁ = D_t φ = ∂_t φ` there and the spatial connection vanishes on the slice.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{constraint, range, Result};
use crate::evolve::{prefix_step, Startup};
use crate::fields::FieldState;
use crate::nullgrid::NullGrid;
use crate::sum::NeumaierSum;

/// Radial Cauchy data in terms of `ψ = rφ`.
pub trait RadialData: Send + Sync {
    fn psi0(&self, r: f64) -> Complex64;
    fn psi0_r(&self, r: f64) -> Complex64;
    fn psi0_rr(&self, r: f64) -> Complex64;
    /// `π₀ = ∂_t ψ` at `t = 0`.
    fn pi0(&self, r: f64) -> Complex64;
    /// Point charge at the origin, `q(0, 0+)`. Only meaningful for runs kept
    /// away from the axis.
    fn background_charge(&self) -> f64 {
        0.0
    }
    /// Radial interval outside which `ψ₀` and `π₀` vanish, if compact.
    fn support(&self) -> Option<(f64, f64)> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileFamily {
    /// `a (1 - x²)⁴` on `|x| < 1`, `x = (r - r_c)/w`.
    CompactBump,
    /// `a exp(-x²)`.
    Gaussian,
    /// `a (1 + r²)^{-k/2}`.
    PolynomialTail,
}

/// `φ₀ = s(r)` real and `φ₁ = i m λ s(r)`, so `Im(φ₀ conj φ₁) = -m λ s²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataProfile {
    pub family: ProfileFamily,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    /// Tail exponent `k`; polynomial-tail only.
    #[serde(default)]
    pub tail_exponent: f64,
    pub winding: i32,
    pub lambda: f64,
}

impl Default for DataProfile {
    fn default() -> Self {
        Self {
            family: ProfileFamily::CompactBump,
            amplitude: 1.0,
            center: 6.0,
            width: 1.0,
            tail_exponent: 0.0,
            winding: 1,
            lambda: 1.0,
        }
    }
}

impl DataProfile {
    pub fn validate(&self, grid: &NullGrid, gamma0: f64) -> Result<()> {
        if !(gamma0 > 0.0 && gamma0 <= 1.0) {
            return Err(constraint(format!("gamma0 = {gamma0} outside (0, 1]")));
        }
        if !self.amplitude.is_finite() || !self.lambda.is_finite() {
            return Err(constraint("non-finite profile parameter"));
        }
        let r_max = 2.0 * grid.v_max();
        match self.family {
            ProfileFamily::CompactBump | ProfileFamily::Gaussian => {
                if !(self.width > 0.0) {
                    return Err(constraint("profile width must be positive"));
                }
                if self.family == ProfileFamily::CompactBump && self.center - self.width <= 0.0 {
                    return Err(constraint("compact bump must satisfy r_c - w > 0"));
                }
                if self.amplitude != 0.0 && self.center + self.width > r_max {
                    return Err(range(format!(
                        "profile support reaches r = {} beyond r_max = {r_max}",
                        self.center + self.width
                    )));
                }
            }
            ProfileFamily::PolynomialTail => {
                let k = self.tail_exponent;
                if !(2.0 * k - 2.0 > 2.0 + gamma0) {
                    return Err(constraint(format!(
                        "tail exponent k = {k} makes the weighted energy diverge; need 2k - 2 > 2 + gamma0"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `(s, s', s'')`.
    fn shape(&self, r: f64) -> (f64, f64, f64) {
        let a = self.amplitude;
        match self.family {
            ProfileFamily::CompactBump => {
                let w = self.width;
                let x = (r - self.center) / w;
                if x.abs() >= 1.0 {
                    return (0.0, 0.0, 0.0);
                }
                let y = 1.0 - x * x;
                (
                    a * y.powi(4),
                    -8.0 * a * x * y.powi(3) / w,
                    -8.0 * a * y * y * (1.0 - 7.0 * x * x) / (w * w),
                )
            }
            ProfileFamily::Gaussian => {
                let w = self.width;
                let x = (r - self.center) / w;
                let s = a * (-x * x).exp();
                (s, -2.0 * x * s / w, (4.0 * x * x - 2.0) * s / (w * w))
            }
            ProfileFamily::PolynomialTail => {
                let k = self.tail_exponent;
                let b = 1.0 + r * r;
                let s = a * b.powf(-0.5 * k);
                let s1 = -k * r * s / b;
                let s2 = -k * s / b + k * (k + 2.0) * r * r * s / (b * b);
                (s, s1, s2)
            }
        }
    }
}

impl RadialData for DataProfile {
    fn psi0(&self, r: f64) -> Complex64 {
        Complex64::new(r * self.shape(r).0, 0.0)
    }
    fn psi0_r(&self, r: f64) -> Complex64 {
        let (s, s1, _) = self.shape(r);
        Complex64::new(s + r * s1, 0.0)
    }
    fn psi0_rr(&self, r: f64) -> Complex64 {
        let (_, s1, s2) = self.shape(r);
        Complex64::new(2.0 * s1 + r * s2, 0.0)
    }
    fn pi0(&self, r: f64) -> Complex64 {
        Complex64::new(0.0, self.winding as f64 * self.lambda * r * self.shape(r).0)
    }
    fn support(&self) -> Option<(f64, f64)> {
        match self.family {
            ProfileFamily::CompactBump => Some((self.center - self.width, self.center + self.width)),
            _ => None,
        }
    }
}

/// The exact free wave `ψ = g(v) - g(u)` with `g(x) = a exp(-((x - c)/w)²)`.
/// Real, so it carries no charge and solves the coupled system with `A = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeWave {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Default for FreeWave {
    fn default() -> Self {
        Self { amplitude: 1.0, center: 3.0, width: 1.0 }
    }
}

impl FreeWave {
    pub fn g(&self, x: f64) -> f64 {
        let y = (x - self.center) / self.width;
        self.amplitude * (-y * y).exp()
    }
    pub fn g1(&self, x: f64) -> f64 {
        let y = (x - self.center) / self.width;
        -2.0 * y / self.width * self.g(x)
    }
    pub fn g2(&self, x: f64) -> f64 {
        let y = (x - self.center) / self.width;
        (4.0 * y * y - 2.0) / (self.width * self.width) * self.g(x)
    }
    /// Exact `ψ(u, v)`.
    pub fn psi(&self, u: f64, v: f64) -> f64 {
        self.g(v) - self.g(u)
    }
    /// Exact `D_u ψ = ∂_u ψ`.
    pub fn du_psi(&self, u: f64) -> f64 {
        -self.g1(u)
    }
}

impl RadialData for FreeWave {
    fn psi0(&self, r: f64) -> Complex64 {
        Complex64::new(self.psi(-0.5 * r, 0.5 * r), 0.0)
    }
    fn psi0_r(&self, r: f64) -> Complex64 {
        Complex64::new(0.5 * (self.g1(0.5 * r) + self.g1(-0.5 * r)), 0.0)
    }
    fn psi0_rr(&self, r: f64) -> Complex64 {
        Complex64::new(0.25 * (self.g2(0.5 * r) - self.g2(-0.5 * r)), 0.0)
    }
    fn pi0(&self, r: f64) -> Complex64 {
        Complex64::new(0.5 * (self.g1(0.5 * r) - self.g1(-0.5 * r)), 0.0)
    }
}

/// Vacuum with a point charge `q₀` at the origin: the exterior Coulomb field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coulomb {
    pub q0: f64,
}

impl RadialData for Coulomb {
    fn psi0(&self, _: f64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn psi0_r(&self, _: f64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn psi0_rr(&self, _: f64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn pi0(&self, _: f64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn background_charge(&self) -> f64 {
        self.q0
    }
}

/// Cauchy data sampled at `r_k = k h`, `k = 0..=N`.
#[derive(Clone)]
pub struct InitialSlice {
    pub data: Arc<dyn RadialData>,
    pub h: f64,
    pub big_r: f64,
    pub r: Vec<f64>,
    pub psi0: Vec<Complex64>,
    pub psi0_r: Vec<Complex64>,
    pub pi0: Vec<Complex64>,
    /// Charge within radius `r_k`, from the Gauss constraint.
    pub q: Vec<f64>,
    pub q0: f64,
}

/// `Im(ψ₀ conj π₀) = r² Im(φ₀ conj φ₁)`, the radial charge density times `r²`.
fn charge_density(data: &dyn RadialData, r: f64) -> f64 {
    (data.psi0(r) * data.pi0(r).conj()).im
}

impl InitialSlice {
    pub fn build(data: Arc<dyn RadialData>, grid: &NullGrid) -> Result<Self> {
        let n = grid.n();
        let h = grid.h();
        let r: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
        let psi0: Vec<Complex64> = r.iter().map(|&x| data.psi0(x)).collect();
        let psi0_r: Vec<Complex64> = r.iter().map(|&x| data.psi0_r(x)).collect();
        let pi0: Vec<Complex64> = r.iter().map(|&x| data.pi0(x)).collect();
        if psi0.iter().chain(&psi0_r).chain(&pi0).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(constraint("initial data not finite on the grid"));
        }
        if let Some((lo, hi)) = data.support() {
            if hi > 2.0 * grid.v_max() && psi0.iter().any(|z| z.norm() > 0.0) {
                return Err(range(format!("data support [{lo}, {hi}] exceeds r_max")));
            }
        }
        // Simpson on each cell [r_k, r_{k+1}] with the analytic midpoint value.
        let mut q = Vec::with_capacity(n + 1);
        let mut acc = NeumaierSum::new();
        acc.add(data.background_charge());
        q.push(acc.value());
        for k in 0..n {
            let f0 = charge_density(&*data, r[k]);
            let fm = charge_density(&*data, r[k] + 0.5 * h);
            let f1 = charge_density(&*data, r[k + 1]);
            acc.add(h / 6.0 * (f0 + 4.0 * fm + f1));
            q.push(acc.value());
        }
        let q0 = q[n];
        Ok(Self { data, h, big_r: grid.big_r(), r, psi0, psi0_r, pi0, q, q0 })
    }

    pub fn from_profile(profile: DataProfile, grid: &NullGrid, gamma0: f64) -> Result<Self> {
        profile.validate(grid, gamma0)?;
        Self::build(Arc::new(profile), grid)
    }

    /// `(1/4π) ∫ Im(φ₀ conj φ₁) dx` evaluated directly as one sum with the cell
    /// rule of the Gauss integration; agrees with `q0` to round-off.
    pub fn charge_by_quadrature(&self) -> f64 {
        let n = self.r.len() - 1;
        let data = &*self.data;
        let mut s = NeumaierSum::new();
        s.add(data.background_charge());
        for k in 0..n {
            let (r0, r1) = (self.r[k], self.r[k + 1]);
            let f = charge_density(data, r0) + 4.0 * charge_density(data, 0.5 * (r0 + r1)) + charge_density(data, r1);
            s.add(self.h / 6.0 * f);
        }
        s.value()
    }

    /// Max residual of `∂_r q = Im(ψ₀ conj π₀)` by central differences.
    pub fn gauss_residual(&self) -> f64 {
        let n = self.r.len();
        (1..n - 1)
            .map(|k| {
                let dq = (self.q[k + 1] - self.q[k - 1]) / (2.0 * self.h);
                (dq - (self.psi0[k] * self.pi0[k].conj()).im).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Weighted energy
    /// `4π ∫ (1+r)^{1+γ₀} (|ψ₀' - ψ₀/r|² + |π₀|² + q̃²/r²) dr` with `q̃ = q - q₀ 1_{r ≥ R}`,
    /// the spherical form of `∫(1+r)^{1+γ₀}(|Dφ₀|² + |φ₁|² + |Ẽ|²) dx`.
    pub fn weighted_energy(&self, gamma0: f64) -> Result<f64> {
        if !(gamma0 > 0.0 && gamma0 <= 1.0) {
            return Err(constraint(format!("gamma0 = {gamma0} outside (0, 1]")));
        }
        let k_r = (self.big_r / self.h).round() as usize;
        let integrand = |k: usize, exterior: bool| -> f64 {
            let r = self.r[k];
            if r == 0.0 {
                return self.pi0[k].norm_sqr();
            }
            let qt = if exterior { self.q[k] - self.q0 } else { self.q[k] };
            let e = (self.psi0_r[k] - self.psi0[k] / r).norm_sqr() + self.pi0[k].norm_sqr() + qt * qt / (r * r);
            (1.0 + r).powf(1.0 + gamma0) * e
        };
        let inner: Vec<f64> = (0..=k_r).map(|k| integrand(k, false)).collect();
        let outer: Vec<f64> = (k_r..self.r.len()).map(|k| integrand(k, true)).collect();
        let e = 4.0 * std::f64::consts::PI * (simpson(&inner, self.h) + simpson(&outer, self.h));
        if !e.is_finite() {
            return Err(constraint("weighted energy diverges"));
        }
        Ok(e)
    }

    /// Fill the `t = 0` and `t = h` diagonals of a state.
    ///
    /// The Cauchy points carry `ψ₀`, `q(0, r)`, `A_u = 0` and `ζ = π₀ - ψ₀'`. On
    /// `t = h` only `ψ` depends on `method`; `q`, `A_u`, `ζ` there are integrated
    /// along each row from its Cauchy point exactly as in the march.
    ///
    /// At `t = 0`, `∂_t²ψ = ψ₀'' + iρψ₀` and `∂_t q = Im(ψ₀ conj ψ₀')`.
    pub fn to_characteristic(&self, grid: &NullGrid, state: &mut FieldState, method: Startup) {
        let n = grid.n();
        let h = grid.h();
        let i = Complex64::new(0.0, 1.0);
        for a in 0..=n / 2 {
            let b = n - a;
            let k = b - a;
            let idx = grid.idx(a, b);
            state.psi[idx] = self.psi0[k];
            state.q[idx] = self.q[k];
            state.a_u[idx] = 0.0;
            state.du_psi[idx] = self.pi0[k] - self.psi0_r[k];
        }
        for a in 1..=n / 2 {
            let b = n - a + 1;
            let r = grid.r(a, b);
            let d = &*self.data;
            let psi0 = d.psi0(r);
            let rho = self.q[b - a] / (r * r);
            let psi = match method {
                Startup::Taylor2 => psi0 + h * d.pi0(r) + 0.5 * h * h * (d.psi0_rr(r) + i * rho * psi0),
                Startup::DAlembert => {
                    // Exact for the free part since r - h >= 0; the source enters
                    // through its Taylor terms up to h³.
                    let pi0 = d.pi0(r);
                    let free = 0.5 * (d.psi0(r + h) + d.psi0(r - h))
                        + (h / 6.0) * (d.pi0(r - h) + 4.0 * pi0 + d.pi0(r + h));
                    let rho_t = (psi0 * d.psi0_r(r).conj()).im / (r * r);
                    free + i * (0.5 * h * h * rho * psi0 + (h * h * h / 6.0) * (rho_t * psi0 + rho * pi0))
                }
            };
            let w = grid.idx(a, b - 1);
            let nn = grid.idx(a, b);
            state.psi[nn] = psi;
            let (q, au, zeta) = prefix_step(
                state.q[w],
                state.a_u[w],
                state.du_psi[w],
                state.psi[w],
                psi,
                grid.r(a, b - 1),
                r,
                h,
            );
            state.q[nn] = q;
            state.a_u[nn] = au;
            state.du_psi[nn] = zeta;
        }
    }
}

/// Composite Simpson on an odd number of equally spaced samples.
pub fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    debug_assert!(n % 2 == 1, "Simpson needs an even number of intervals");
    let mut s = NeumaierSum::new();
    s.add(f[0]);
    s.add(f[n - 1]);
    for (k, &x) in f.iter().enumerate().take(n - 1).skip(1) {
        s.add(if k % 2 == 1 { 4.0 * x } else { 2.0 * x });
    }
    s.value() * h / 3.0
}
