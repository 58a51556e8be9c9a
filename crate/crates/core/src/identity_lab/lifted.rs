//! Discrete closure of the integrated identities on evolved states.
//!
//! A spherically symmetric current `J̃` with `r²J̃_L = a`, `r²J̃_{L̄} = b`
//! satisfies, with `dvol = 2r² du dv dω` and Green's theorem in `(u, v)`,
//!
//! ```text
//! ∫∫ ∂^μ J̃_μ dvol = ∮ P dv - Q du,    P = -4π a,  Q = -4π b
//! ```
//!
//! counterclockwise. Exact derivatives `L(r^{p+1}|φ|²)` and friends integrate to
//! zero around the closed boundary and are dropped from `a` and `b`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::{dv_row, weighted_null_derivatives, FieldState};
use crate::identity_lab::Triple;
use crate::nullgrid::{NullGrid, RegionSpec};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedClosure {
    /// `∫∫` of the bulk integrand.
    pub bulk: f64,
    /// `∮ P dv - Q du`.
    pub boundary: f64,
    pub residual: f64,
    /// Sum of the absolute bulk and per-piece boundary contributions.
    pub scale: f64,
}

impl LiftedClosure {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.residual.abs() / self.scale
        }
    }
}

/// Closure of the energy identity for `triple` on `D_{τ₁,τ₂}` with `F̃ = F`.
///
/// `Time` uses the slab bounded by `Σ_τ₁`, `Σ_τ₂` and `v = v_max`; `Rp` uses
/// its part with `r >= R`, closed by the cylinder `r = R`. The Morawetz
/// triples are not lifted.
pub fn lifted_closure(grid: &NullGrid, st: &FieldState, triple: &Triple, tau1: f64, tau2: f64) -> Result<LiftedClosure> {
    triple.validate()?;
    let q2 = |a: usize, b: usize| {
        let r = grid.r(a, b);
        if r == 0.0 {
            0.0
        } else {
            let q = st.q[grid.idx(a, b)];
            q * q / (r * r)
        }
    };
    let (region, p) = match *triple {
        Triple::Time => (grid.region(RegionSpec::Slab { tau1, tau2 })?, None),
        Triple::Rp { p } => (grid.region(RegionSpec::ConeSlab { tau1, tau2 })?, Some(p)),
        Triple::Morawetz(_) => return Err(crate::error::constraint("the Morawetz triples are checked on synthetic fields only")),
    };
    // (r²J̃_L, r²J̃_{L̄}) at a node.
    let ab = |a: usize, b: usize| -> (f64, f64) {
        match p {
            None => {
                let (lv, lu) = weighted_null_derivatives(grid, st, a, b);
                let c = q2(a, b);
                (0.5 * (lv + c), 0.5 * (lu + c))
            }
            Some(p) => {
                let rp = grid.r(a, b).powf(p);
                (rp * dv_row(grid, &st.psi, a, b).norm_sqr(), rp * q2(a, b))
            }
        }
    };
    let bulk = match p {
        None => 0.0,
        Some(p) => {
            FOUR_PI
                * region.integrate(|a, b| {
                    let r = grid.r(a, b);
                    let dv2 = dv_row(grid, &st.psi, a, b).norm_sqr();
                    r.powf(p - 1.0) * (p * dv2 + (2.0 - p) * q2(a, b))
                })
        }
    };
    let pq = |a: usize, b: usize| {
        let (x, y) = ab(a, b);
        (-FOUR_PI * x, -FOUR_PI * y)
    };
    let mut scale = bulk.abs();
    let mut boundary = 0.0;
    for piece in &region.pieces {
        let f = piece.flux(pq);
        scale += f.abs();
        boundary += f;
    }
    Ok(LiftedClosure { bulk, boundary, residual: bulk - boundary, scale })
}
