//! Multiplier triples `(X, Y, χ)`.

use serde::{Deserialize, Serialize};

use super::jet::{M4, V4};
use crate::error::{constraint, Result};

/// The two radial weights of the `f(r)∂_r` multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "snake_case")]
pub enum MorawetzWeight {
    /// `f = 2ε⁻¹ - 2ε⁻¹(1+r)^{-ε}`.
    Interior { eps: f64 },
    /// `f = 2ε⁻¹(r₁^{-ε} - (1+r)^{-ε})`.
    Exterior { eps: f64, r1: f64 },
}

impl MorawetzWeight {
    pub fn eps(&self) -> f64 {
        match *self {
            Self::Interior { eps } | Self::Exterior { eps, .. } => eps,
        }
    }

    /// `(f, f', f'')`.
    pub fn f(&self, r: f64) -> [f64; 3] {
        let eps = self.eps();
        let s = (1.0 + r).powf(-eps);
        let f = match *self {
            Self::Interior { .. } => 2.0 / eps * (1.0 - s),
            Self::Exterior { r1, .. } => 2.0 / eps * (r1.powf(-eps) - s),
        };
        [f, 2.0 * s / (1.0 + r), -2.0 * (1.0 + eps) * s / (1.0 + r).powi(2)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Triple {
    /// `(∂_t, 0, 0)`.
    Time,
    /// `(f ∂_r, 0, f/r)`.
    Morawetz(MorawetzWeight),
    /// `(r^p L, (p/2) r^{p-2}|φ|² L, r^{p-1})`.
    Rp { p: f64 },
}

/// The triple at one point. `Y = y_coef · |φ|² · L` with `L = ∂_t + ∂_r`.
#[derive(Clone, Copy, Debug)]
pub struct TripleAt {
    /// `X^μ`.
    pub x: V4,
    /// `∂_μ X^ν`, indexed `[μ][ν]`.
    pub dx: M4,
    pub chi: f64,
    /// `∂_μ χ`.
    pub dchi: V4,
    /// `□χ`.
    pub box_chi: f64,
    pub y_coef: f64,
    /// `d y_coef / dr`.
    pub y_coef_r: f64,
}

impl Triple {
    pub fn name(&self) -> String {
        match self {
            Self::Time => "time".into(),
            Self::Morawetz(MorawetzWeight::Interior { .. }) => "morawetz_interior".into(),
            Self::Morawetz(MorawetzWeight::Exterior { .. }) => "morawetz_exterior".into(),
            Self::Rp { p } => format!("rp_{p}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Time => Ok(()),
            Self::Morawetz(w) => {
                let eps = w.eps();
                if !(eps > 0.0 && eps < 0.25) {
                    return Err(constraint(format!("eps = {eps} violates 0 < eps < 1/4")));
                }
                if let MorawetzWeight::Exterior { r1, .. } = w {
                    if !(r1 > 1.0) {
                        return Err(constraint(format!("r1 = {r1} violates r1 >= R > 1")));
                    }
                }
                Ok(())
            }
            Self::Rp { p } => {
                if !(0.0..=2.0).contains(&p) {
                    return Err(constraint(format!("p = {p} is outside the admissible range: for all 0 <= p <= 2")));
                }
                Ok(())
            }
        }
    }

    /// True when the triple blows up at `r = 0`.
    pub fn singular_at_axis(&self) -> bool {
        !matches!(self, Self::Time)
    }

    /// Evaluate at spatial point `x` (`r > 0` for the radial triples).
    pub fn at(&self, x: &V4) -> TripleAt {
        let mut out = TripleAt { x: [0.0; 4], dx: [[0.0; 4]; 4], chi: 0.0, dchi: [0.0; 4], box_chi: 0.0, y_coef: 0.0, y_coef_r: 0.0 };
        if let Self::Time = self {
            out.x[0] = 1.0;
            return out;
        }
        let r = (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt();
        let n = [x[1] / r, x[2] / r, x[3] / r];
        // (X^0, radial part of X^i) and their r-derivatives; χ, χ', Δχ.
        let (x0, x0r, xr, xrr, chi, chi_r, lap_chi) = match *self {
            Self::Time => unreachable!(),
            Self::Morawetz(w) => {
                let [f, f1, f2] = w.f(r);
                (0.0, 0.0, f, f1, f / r, f1 / r - f / (r * r), f2 / r)
            }
            Self::Rp { p } => {
                out.y_coef = 0.5 * p * r.powf(p - 2.0);
                out.y_coef_r = 0.5 * p * (p - 2.0) * r.powf(p - 3.0);
                (r.powf(p), p * r.powf(p - 1.0), r.powf(p), p * r.powf(p - 1.0), r.powf(p - 1.0), (p - 1.0) * r.powf(p - 2.0), p * (p - 1.0) * r.powf(p - 3.0))
            }
        };
        out.x[0] = x0;
        for i in 0..3 {
            out.x[i + 1] = xr * n[i];
            out.dx[i + 1][0] = x0r * n[i];
            out.dchi[i + 1] = chi_r * n[i];
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                // ∂_j (g(r) n_i) = g' n_i n_j + (g/r)(δ_ij - n_i n_j)
                out.dx[j + 1][i + 1] = xrr * n[i] * n[j] + xr / r * (delta - n[i] * n[j]);
            }
        }
        out.chi = chi;
        out.box_chi = lap_chi;
        out
    }
}

/// The triples the acceptance suite exercises.
pub fn standard_triples(eps: f64, r1: f64) -> Vec<Triple> {
    let mut v = vec![
        Triple::Time,
        Triple::Morawetz(MorawetzWeight::Interior { eps }),
        Triple::Morawetz(MorawetzWeight::Exterior { eps, r1 }),
    ];
    v.extend([0.0, 0.5, 1.0, 1.8, 2.0].map(|p| Triple::Rp { p }));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn morawetz_weight_matches_stated_derivatives() {
        let eps = 0.1;
        for w in [MorawetzWeight::Interior { eps }, MorawetzWeight::Exterior { eps, r1: 3.0 }] {
            for r in [0.7, 2.0, 9.0] {
                let [_, f1, f2] = w.f(r);
                assert!((0.5 * f1 - (1.0 + r).powf(-1.0 - eps)).abs() < 1e-15);
                // -½□χ with χ = f/r equals (1+ε)/(r(1+r)^{2+ε})
                assert!((-0.5 * f2 / r - (1.0 + eps) / (r * (1.0 + r).powf(2.0 + eps))).abs() < 1e-15);
                let h = 1e-5;
                let fd = (w.f(r + h)[0] - w.f(r - h)[0]) / (2.0 * h);
                assert!((fd - f1).abs() < 1e-8);
            }
        }
    }

    /// `χ - ½f' >= 1/r` fails just above `r = 1`; the intermediate bound
    /// `2ε⁻¹/r - (1+2ε⁻¹)/(r(1+r)^ε)` reaches `1/r` at
    /// `r* = ((2+ε)/(2-ε))^{1/ε} - 1`, about 1.72, and both hold beyond it.
    #[test]
    fn interior_weight_lower_bound_threshold() {
        for eps in [0.01, 0.1, 0.2, 0.249] {
            let w = MorawetzWeight::Interior { eps };
            let gap = |r: f64| {
                let [f, f1, _] = w.f(r);
                f / r - 0.5 * f1 - 1.0 / r
            };
            let r_star = ((2.0 + eps) / (2.0 - eps)).powf(1.0 / eps) - 1.0;
            assert!(r_star > 1.7 && r_star < 1.75);
            assert!(gap(1.01) < 0.0);
            for r in [r_star * (1.0 + 1e-6), 2.0, 10.0, 1e3] {
                assert!(gap(r) >= 0.0);
            }
        }
    }

    #[test]
    fn rejects_p_above_two() {
        let e = Triple::Rp { p: 2.5 }.validate().unwrap_err();
        assert!(e.to_string().contains("0 <= p <= 2"));
        assert!(Triple::Rp { p: 2.0 }.validate().is_ok());
    }
}
