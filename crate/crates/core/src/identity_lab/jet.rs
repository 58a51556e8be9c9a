//! Second-order jets of band-limited trigonometric fields on Minkowski space.
//!
//! Coordinates are `(t, x, y, z)` with metric `diag(-1, 1, 1, 1)`. A field is
//! evaluated together with its analytic derivatives so that only the outer
//! divergence in the identity checks is ever differenced numerically.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

pub type V4 = [f64; 4];
pub type M4 = [[f64; 4]; 4];

/// Diagonal of the Minkowski metric; it is its own inverse.
pub const ETA: V4 = [-1.0, 1.0, 1.0, 1.0];

fn phase(k: &V4, x: &V4) -> f64 {
    k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + k[3] * x[3]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexJet {
    pub v: Complex64,
    pub d: [Complex64; 4],
    pub dd: [[Complex64; 4]; 4],
}

impl ComplexJet {
    pub const ZERO: Self = Self { v: Complex64::new(0.0, 0.0), d: [Complex64::new(0.0, 0.0); 4], dd: [[Complex64::new(0.0, 0.0); 4]; 4] };
}

/// Real scalar with derivatives up to third order (the gauge needs `∂³χ` for `∂∂A`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealJet {
    pub v: f64,
    pub d: V4,
    pub dd: M4,
    pub ddd: [M4; 4],
}

impl RealJet {
    pub const ZERO: Self = Self { v: 0.0, d: [0.0; 4], dd: [[0.0; 4]; 4], ddd: [[[0.0; 4]; 4]; 4] };
}

/// A real 1-form: `v[n] = A_n`, `d[m][n] = ∂_m A_n`, `dd[m][k][n] = ∂_m ∂_k A_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormJet {
    pub v: V4,
    pub d: M4,
    pub dd: [M4; 4],
}

impl FormJet {
    pub const ZERO: Self = Self { v: [0.0; 4], d: [[0.0; 4]; 4], dd: [[[0.0; 4]; 4]; 4] };

    /// `(dA)_{mn} = ∂_m A_n - ∂_n A_m`.
    pub fn curl(&self) -> M4 {
        let mut f = [[0.0; 4]; 4];
        for m in 0..4 {
            for n in 0..4 {
                f[m][n] = self.d[m][n] - self.d[n][m];
            }
        }
        f
    }

    /// `∂_k (dA)_{mn}`, indexed `[k][m][n]`.
    pub fn curl_gradient(&self) -> [M4; 4] {
        let mut g = [[[0.0; 4]; 4]; 4];
        for k in 0..4 {
            for m in 0..4 {
                for n in 0..4 {
                    g[k][m][n] = self.dd[k][m][n] - self.dd[k][n][m];
                }
            }
        }
        g
    }
}

/// `Σ c e^{i k·x}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigComplex {
    pub modes: Vec<(V4, Complex64)>,
}

impl TrigComplex {
    pub fn jet(&self, x: &V4) -> ComplexJet {
        let mut j = ComplexJet::ZERO;
        let i = Complex64::i();
        for (k, c) in &self.modes {
            let e = c * Complex64::from_polar(1.0, phase(k, x));
            j.v += e;
            for m in 0..4 {
                j.d[m] += i * k[m] * e;
                for n in 0..4 {
                    j.dd[m][n] -= k[m] * k[n] * e;
                }
            }
        }
        j
    }
}

/// `Σ a cos(k·x + θ)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigReal {
    pub modes: Vec<(V4, f64, f64)>,
}

impl TrigReal {
    pub fn jet(&self, x: &V4) -> RealJet {
        let mut j = RealJet::ZERO;
        for (k, a, th) in &self.modes {
            let p = phase(k, x) + th;
            let (s, c) = p.sin_cos();
            j.v += a * c;
            for m in 0..4 {
                j.d[m] -= a * k[m] * s;
                for n in 0..4 {
                    j.dd[m][n] -= a * k[m] * k[n] * c;
                    for l in 0..4 {
                        j.ddd[m][n][l] += a * k[m] * k[n] * k[l] * s;
                    }
                }
            }
        }
        j
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigForm {
    pub comps: [TrigReal; 4],
}

impl TrigForm {
    pub fn jet(&self, x: &V4) -> FormJet {
        let mut j = FormJet::ZERO;
        for n in 0..4 {
            let c = self.comps[n].jet(x);
            j.v[n] = c.v;
            for m in 0..4 {
                j.d[m][n] = c.d[m];
                for k in 0..4 {
                    j.dd[m][k][n] = c.dd[m][k];
                }
            }
        }
        j
    }
}

/// Scalar `φ`, connection `A` (with `F = dA`), chargeless potential `Ã`
/// (with `F̃ = dÃ`, so Bianchi holds by construction) and an optional gauge
/// `χ` applied as `(φ, A) → (e^{iχ}φ, A - dχ)`.
///
/// The fields need not solve anything: all source terms are kept.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SyntheticField {
    pub phi: TrigComplex,
    pub a: TrigForm,
    pub a_tilde: TrigForm,
    pub gauge: Option<TrigReal>,
}

/// Everything the currents need at one point.
#[derive(Clone, Copy, Debug)]
pub struct PointJet {
    pub x: V4,
    pub phi: ComplexJet,
    pub a: FormJet,
    pub a_tilde: FormJet,
}

fn random_wavevector(rng: &mut ChaCha8Rng, kmax: f64) -> V4 {
    [0; 4].map(|_| rng.gen_range(-kmax..=kmax))
}

fn random_real(rng: &mut ChaCha8Rng, modes: usize, amp: f64, kmax: f64) -> TrigReal {
    TrigReal {
        modes: (0..modes)
            .map(|_| {
                let k = random_wavevector(rng, kmax);
                (k, amp * rng.gen_range(-1.0..=1.0), rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect(),
    }
}

fn random_form(rng: &mut ChaCha8Rng, modes: usize, amp: f64, kmax: f64) -> TrigForm {
    TrigForm { comps: [0; 4].map(|_| random_real(rng, modes, amp, kmax)) }
}

impl SyntheticField {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Deterministic random field: a few modes per component, wavenumbers at most `kmax`.
    pub fn random(seed: u64, modes: usize, kmax: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = TrigComplex {
            modes: (0..modes)
                .map(|_| {
                    let k = random_wavevector(&mut rng, kmax);
                    (k, Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)) * 0.5)
                })
                .collect(),
        };
        let a = random_form(&mut rng, modes, 0.4, kmax);
        let a_tilde = random_form(&mut rng, modes, 0.4, kmax);
        Self { phi, a, a_tilde, gauge: None }
    }

    /// A random smooth gauge function with the same bandwidth.
    pub fn random_gauge(seed: u64, modes: usize, kmax: f64) -> TrigReal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        random_real(&mut rng, modes, 1.5, kmax)
    }

    pub fn with_gauge(&self, chi: TrigReal) -> Self {
        Self { gauge: Some(chi), ..self.clone() }
    }

    pub fn at(&self, x: &V4) -> PointJet {
        let mut phi = self.phi.jet(x);
        let mut a = self.a.jet(x);
        if let Some(g) = &self.gauge {
            let c = g.jet(x);
            phi = gauge_scalar(&phi, &c);
            for n in 0..4 {
                a.v[n] -= c.d[n];
                for m in 0..4 {
                    a.d[m][n] -= c.dd[m][n];
                    for k in 0..4 {
                        a.dd[m][k][n] -= c.ddd[m][k][n];
                    }
                }
            }
        }
        PointJet { x: *x, phi, a, a_tilde: self.a_tilde.jet(x) }
    }
}

/// Jet of `e^{iχ} φ`.
fn gauge_scalar(p: &ComplexJet, c: &RealJet) -> ComplexJet {
    let i = Complex64::i();
    let g = Complex64::from_polar(1.0, c.v);
    let dg: [Complex64; 4] = std::array::from_fn(|m| i * c.d[m] * g);
    let mut out = ComplexJet { v: g * p.v, ..ComplexJet::ZERO };
    for m in 0..4 {
        out.d[m] = dg[m] * p.v + g * p.d[m];
        for n in 0..4 {
            let ddg = g * (i * c.dd[m][n] - c.d[m] * c.d[n]);
            out.dd[m][n] = ddg * p.v + dg[m] * p.d[n] + dg[n] * p.d[m] + g * p.dd[m][n];
        }
    }
    out
}
