//! Double-null lattice, foliation leaves and region quadrature.
//!
//! Coordinates: `u = (t - r)/2`, `v = (t + r)/2`, so `t = u + v`, `r = v - u`,
//! `dt dr = 2 du dv` and `dvol = 2 r^2 du dv dω`. The lattice is
//! `x_k = -v_max + k h`, `k = 0..=N`, `h = 2 v_max / N`, and the index pair
//! `(a, b)` names the point `u = x_a`, `v = x_b`. The causal development of
//! `{t = 0, r <= 2 v_max}` is `a <= b <= N`, `a + b >= N`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{constraint, range, Result};
use crate::sum::NeumaierSum;

const LATTICE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub v_max: f64,
    pub n: usize,
    /// Foliation radius `R`.
    pub r_foliation: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { v_max: 32.0, n: 2048, r_foliation: 2.0 }
    }
}

#[derive(Clone, Debug)]
pub struct NullGrid {
    spec: GridSpec,
    h: f64,
    offsets: Vec<usize>,
    len: usize,
}

impl NullGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let GridSpec { v_max, n, r_foliation: r } = spec;
        if !(r > 1.0) {
            return Err(constraint(format!("foliation radius must satisfy R > 1, got R = {r}")));
        }
        if !(v_max > r) {
            return Err(constraint(format!("need v_max > R, got v_max = {v_max}, R = {r}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(constraint(format!("N must be even and >= 8, got {n}")));
        }
        let h = 2.0 * v_max / n as f64;
        // The junction r = R of every leaf must be a lattice point of the t-slice,
        // whose radii are even multiples of h.
        let k = r / h;
        if (k - k.round()).abs() > LATTICE_TOL || k.round() as i64 % 2 != 0 {
            return Err(constraint(format!(
                "R / h must be an even integer (R = {r}, h = {h})"
            )));
        }
        let mut offsets = Vec::with_capacity(n + 2);
        let mut len = 0;
        for a in 0..=n {
            offsets.push(len);
            len += n + 1 - a.max(n - a);
        }
        offsets.push(len);
        Ok(Self { spec, h, offsets, len })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn big_r(&self) -> f64 {
        self.spec.r_foliation
    }

    pub fn v_max(&self) -> f64 {
        self.spec.v_max
    }

    /// Number of lattice points in the domain.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn x(&self, k: usize) -> f64 {
        -self.spec.v_max + k as f64 * self.h
    }

    #[inline]
    pub fn u(&self, a: usize) -> f64 {
        self.x(a)
    }

    #[inline]
    pub fn v(&self, b: usize) -> f64 {
        self.x(b)
    }

    #[inline]
    pub fn r(&self, a: usize, b: usize) -> f64 {
        (b as f64 - a as f64) * self.h
    }

    #[inline]
    pub fn t(&self, a: usize, b: usize) -> f64 {
        (a as f64 + b as f64 - self.spec.n as f64) * self.h
    }

    #[inline]
    pub fn contains(&self, a: usize, b: usize) -> bool {
        a <= b && b <= self.spec.n && a + b >= self.spec.n
    }

    /// First `b` of row `a`: the Cauchy point for `u < 0`, the axis for `u >= 0`.
    #[inline]
    pub fn row_start(&self, a: usize) -> usize {
        a.max(self.spec.n - a)
    }

    #[inline]
    pub fn idx(&self, a: usize, b: usize) -> usize {
        debug_assert!(self.contains(a, b), "({a}, {b}) outside domain");
        self.offsets[a] + (b - self.row_start(a))
    }

    pub fn try_idx(&self, a: isize, b: isize) -> Option<usize> {
        if a < 0 || b < 0 {
            return None;
        }
        let (a, b) = (a as usize, b as usize);
        self.contains(a, b).then(|| self.idx(a, b))
    }

    pub fn is_axis(&self, a: usize, b: usize) -> bool {
        a == b
    }

    pub fn is_cauchy(&self, a: usize, b: usize) -> bool {
        a + b == self.spec.n
    }

    /// Lattice index of coordinate `x`, if `x` lies on the lattice.
    pub fn lattice_index(&self, x: f64) -> Option<usize> {
        let k = (x + self.spec.v_max) / self.h;
        let kr = k.round();
        if (k - kr).abs() > LATTICE_TOL * k.abs().max(1.0) || kr < 0.0 || kr > self.spec.n as f64 {
            return None;
        }
        Some(kr as usize)
    }

    /// Leaf parameters admissible on this lattice lie on `2h Z` with `|τ| < 2 v_max - R`.
    pub fn tau_step(&self) -> f64 {
        2.0 * self.h
    }

    /// Lattice leaf parameters in `[lo, hi]`, spaced by the lattice multiple of
    /// `2h` nearest to `spacing`.
    pub fn lattice_taus(&self, lo: f64, hi: f64, spacing: f64) -> Vec<f64> {
        let step = self.tau_step();
        let stride = (spacing / step).round().max(1.0) as i64;
        let limit = 2.0 * self.spec.v_max - self.spec.r_foliation;
        let k_lo = (lo.max(-limit + step) / step).ceil() as i64;
        let k_hi = (hi.min(limit - step) / step).floor() as i64;
        let first = k_lo.div_euclid(stride) * stride;
        let first = if first < k_lo { first + stride } else { first };
        (0..)
            .map(|j| first + j * stride)
            .take_while(|&k| k <= k_hi)
            .map(|k| k as f64 * step)
            .collect()
    }
}

/// A polyline on the lattice with trapezoid weights for a one-dimensional measure.
#[derive(Clone, Debug, Default)]
pub struct Segment {
    pub points: Vec<(usize, usize)>,
    pub weights: Vec<f64>,
}

impl Segment {
    fn trapezoid(points: Vec<(usize, usize)>, step: f64) -> Self {
        let m = points.len();
        let weights = (0..m)
            .map(|k| if m == 1 { 0.0 } else if k == 0 || k + 1 == m { 0.5 * step } else { step })
            .collect();
        Self { points, weights }
    }

    pub fn integrate(&self, mut f: impl FnMut(usize, usize) -> f64) -> f64 {
        let mut s = NeumaierSum::new();
        for (&(a, b), &w) in self.points.iter().zip(&self.weights) {
            s.add(w * f(a, b));
        }
        s.value()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafKind {
    Interior,
    Exterior,
}

/// A leaf `Σ_τ`: the flat disc `{t = τ, r <= R}` (interior only) joined to the cone `S_τ`.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub tau: f64,
    pub kind: LeafKind,
    pub u_tau: f64,
    pub v_tau: f64,
    /// Radius where the cone starts: `R` for interior leaves, `r₁ = R - τ` for exterior ones.
    pub r1: f64,
    /// Row index of the cone.
    pub row: usize,
    /// Points ordered from the axis to the junction; weights carry `dr`.
    pub flat: Option<Segment>,
    /// Points ordered from `v_tau` to `v_max`; weights carry `dv`.
    pub cone: Segment,
    /// Radius at which the cone is cut by `v = v_max`.
    pub truncation_radius: f64,
}

impl NullGrid {
    pub fn leaf(&self, tau: f64) -> Result<Leaf> {
        let big_r = self.spec.r_foliation;
        let n = self.spec.n;
        let h = self.h;
        let u_tau = 0.5 * (tau - big_r);
        let v_tau = 0.5 * (tau.abs() + big_r);
        let row = self
            .lattice_index(u_tau)
            .ok_or_else(|| range(format!("leaf tau = {tau} is not on the lattice or outside the grid")))?;
        let b0 = self
            .lattice_index(v_tau)
            .ok_or_else(|| range(format!("leaf tau = {tau} starts beyond v_max")))?;
        if b0 >= n {
            return Err(range(format!("leaf tau = {tau} has an empty cone (v_tau >= v_max)")));
        }
        let cone = Segment::trapezoid((b0..=n).map(|b| (row, b)).collect(), h);
        let kind = if tau >= 0.0 { LeafKind::Interior } else { LeafKind::Exterior };
        let flat = if kind == LeafKind::Interior {
            let s = (tau / h).round() as usize + n;
            if !s.is_multiple_of(2) {
                return Err(range(format!("leaf tau = {tau} is not on the lattice")));
            }
            let m = s / 2;
            let kmax = (big_r / (2.0 * h)).round() as usize;
            let pts: Vec<_> = (0..=kmax).map(|k| (m - k, m + k)).collect();
            debug_assert_eq!(pts[kmax], (row, b0));
            Some(Segment::trapezoid(pts, 2.0 * h))
        } else {
            None
        };
        let r1 = if kind == LeafKind::Interior { big_r } else { big_r - tau };
        Ok(Leaf {
            tau,
            kind,
            u_tau,
            v_tau,
            r1,
            row,
            flat,
            cone,
            truncation_radius: self.spec.v_max - u_tau,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionSpec {
    /// `D_{τ₁,τ₂}` between `Σ_τ₁` and `Σ_τ₂`, closed by `v = v_max`.
    Slab { tau1: f64, tau2: f64 },
    /// The part of the slab with `r >= R`, bounded by `S_τ₁`, `S_τ₂`, the cylinder and `v = v_max`.
    ConeSlab { tau1: f64, tau2: f64 },
    /// `D_{r₁,r₂}` bounded by `S_{r₁,r₂}`, `B_{r₁,r₂}` and `C̄_{r₁,r₂}`.
    Exterior { r1: f64, r2: f64 },
    /// `B_{r₁,r₂}` on `t = 0` (a surface; no bulk).
    Annulus { r1: f64, r2: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PieceKind {
    /// `t = const`.
    Slice,
    /// `u = const`.
    Outgoing,
    /// `v = const`.
    Incoming,
    /// `r = 0`.
    Axis,
    /// `r = R`.
    Cylinder,
}

/// An oriented boundary edge. For a planar current `(P, Q)` the counterclockwise
/// line integral `∮ P dv - Q du` is `Σ_k P_k dv_k - Q_k du_k`.
#[derive(Clone, Debug)]
pub struct BoundaryPiece {
    pub kind: PieceKind,
    pub points: Vec<(usize, usize)>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

impl BoundaryPiece {
    pub fn flux(&self, mut pq: impl FnMut(usize, usize) -> (f64, f64)) -> f64 {
        let mut s = NeumaierSum::new();
        for (k, &(a, b)) in self.points.iter().enumerate() {
            let (p, q) = pq(a, b);
            s.add(p * self.dv[k]);
            s.add(-q * self.du[k]);
        }
        s.value()
    }
}

#[derive(Clone, Debug)]
pub struct Region {
    pub spec: RegionSpec,
    /// Bulk weights for the measure `du dv`.
    pub bulk: Vec<((usize, usize), f64)>,
    /// Counterclockwise boundary pieces in the `(u, v)` plane.
    pub pieces: Vec<BoundaryPiece>,
    /// Set when `v = v_max` stands in for a surface at larger `v`.
    pub truncated: bool,
}

impl Region {
    /// `∫∫ f du dv`.
    pub fn integrate(&self, mut f: impl FnMut(usize, usize) -> f64) -> f64 {
        let mut s = NeumaierSum::new();
        for &((a, b), w) in &self.bulk {
            s.add(w * f(a, b));
        }
        s.value()
    }

    /// `∮ P dv - Q du` over all pieces.
    pub fn boundary_flux(&self, mut pq: impl FnMut(usize, usize) -> (f64, f64)) -> f64 {
        let mut s = NeumaierSum::new();
        for piece in &self.pieces {
            s.add(piece.flux(&mut pq));
        }
        s.value()
    }
}

type Vertex = (i64, i64);

impl NullGrid {
    fn idx_of(&self, x: f64, what: &str) -> Result<i64> {
        self.lattice_index(x)
            .map(|k| k as i64)
            .ok_or_else(|| range(format!("{what} = {x} is not on the lattice")))
    }

    fn slab_vertices(&self, tau1: f64, tau2: f64, with_flat: bool) -> Result<Vec<(Vertex, PieceKind)>> {
        if !(tau1 >= 0.0) || !(tau1 < tau2) {
            return Err(range(format!("slab needs 0 <= tau1 < tau2, got ({tau1}, {tau2})")));
        }
        let n = self.spec.n as i64;
        let kk = (self.spec.r_foliation / (2.0 * self.h)).round() as i64;
        let mid = |tau: f64| -> Result<i64> {
            let s = (tau / self.h).round() as i64 + n;
            if ((tau / self.h) - (tau / self.h).round()).abs() > LATTICE_TOL || s % 2 != 0 {
                return Err(range(format!("tau = {tau} is not on the lattice")));
            }
            Ok(s / 2)
        };
        let (m1, m2) = (mid(tau1)?, mid(tau2)?);
        if m2 + kk >= n {
            return Err(range(format!("tau2 = {tau2} leaves no cone inside v <= v_max")));
        }
        // Each vertex is followed by the kind of the edge leaving it.
        Ok(if with_flat {
            vec![
                ((m1, m1), PieceKind::Axis),
                ((m2, m2), PieceKind::Slice),
                ((m2 - kk, m2 + kk), PieceKind::Outgoing),
                ((m2 - kk, n), PieceKind::Incoming),
                ((m1 - kk, n), PieceKind::Outgoing),
                ((m1 - kk, m1 + kk), PieceKind::Slice),
            ]
        } else {
            vec![
                ((m1 - kk, m1 + kk), PieceKind::Cylinder),
                ((m2 - kk, m2 + kk), PieceKind::Outgoing),
                ((m2 - kk, n), PieceKind::Incoming),
                ((m1 - kk, n), PieceKind::Outgoing),
            ]
        })
    }

    pub fn region(&self, spec: RegionSpec) -> Result<Region> {
        let n = self.spec.n as i64;
        let (verts, truncated, surface) = match spec {
            RegionSpec::Slab { tau1, tau2 } => (self.slab_vertices(tau1, tau2, true)?, true, false),
            RegionSpec::ConeSlab { tau1, tau2 } => (self.slab_vertices(tau1, tau2, false)?, true, false),
            RegionSpec::Exterior { r1, r2 } | RegionSpec::Annulus { r1, r2 } => {
                if !(r1 >= 0.0) || !(r1 < r2) {
                    return Err(range(format!("annular bounds need 0 <= r1 < r2, got ({r1}, {r2})")));
                }
                let r_max = 2.0 * self.spec.v_max;
                let truncated = r2 > r_max;
                let r2c = r2.min(r_max);
                let a1 = self.idx_of(-0.5 * r1, "r1 / 2")?;
                let a2 = self.idx_of(-0.5 * r2c, "r2 / 2")?;
                let b2 = n - a2;
                let surface = matches!(spec, RegionSpec::Annulus { .. });
                let verts = if surface {
                    vec![((a2, b2), PieceKind::Slice), ((a1, n - a1), PieceKind::Slice)]
                } else {
                    vec![
                        ((a2, b2), PieceKind::Slice),
                        ((a1, n - a1), PieceKind::Outgoing),
                        ((a1, b2), PieceKind::Incoming),
                    ]
                };
                (verts, truncated, surface)
            }
        };

        let pieces = self.pieces_from(&verts, !surface);
        let bulk = if surface { Vec::new() } else { self.bulk_weights(&verts) };
        if !surface && bulk.is_empty() {
            return Err(range("empty region".to_string()));
        }
        Ok(Region { spec, bulk, pieces, truncated })
    }

    fn pieces_from(&self, verts: &[(Vertex, PieceKind)], closed: bool) -> Vec<BoundaryPiece> {
        let h = self.h;
        let m = verts.len();
        let edges = if closed { m } else { m - 1 };
        (0..edges)
            .map(|i| {
                let ((a0, b0), kind) = verts[i];
                let (a1, b1) = verts[(i + 1) % m].0;
                let steps = (a1 - a0).abs().max((b1 - b0).abs());
                let (da, db) = ((a1 - a0).signum(), (b1 - b0).signum());
                let points: Vec<_> = (0..=steps)
                    .map(|k| ((a0 + k * da) as usize, (b0 + k * db) as usize))
                    .collect();
                let w = |k: i64| if k == 0 || k == steps { 0.5 } else { 1.0 };
                let du = (0..=steps).map(|k| w(k) * da as f64 * h).collect();
                let dv = (0..=steps).map(|k| w(k) * db as f64 * h).collect();
                BoundaryPiece { kind, points, du, dv }
            })
            .collect()
    }

    fn bulk_weights(&self, verts: &[(Vertex, PieceKind)]) -> Vec<((usize, usize), f64)> {
        let poly: Vec<(f64, f64)> = verts.iter().map(|&((a, b), _)| (a as f64, b as f64)).collect();
        let (amin, amax) = verts.iter().fold((i64::MAX, i64::MIN), |(lo, hi), v| (lo.min(v.0 .0), hi.max(v.0 .0)));
        let (bmin, bmax) = verts.iter().fold((i64::MAX, i64::MIN), |(lo, hi), v| (lo.min(v.0 .1), hi.max(v.0 .1)));
        let h2 = self.h * self.h;
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut put = |p: (i64, i64), w: f64| {
            *acc.entry((p.0 as usize, p.1 as usize)).or_insert(0.0) += w;
        };
        for a in amin..amax {
            for b in bmin..bmax {
                let (x, y) = (a as f64, b as f64);
                // Quarter triangles: bottom, right, top, left (centroids).
                let q = [
                    inside(&poly, x + 0.5, y + 1.0 / 6.0),
                    inside(&poly, x + 5.0 / 6.0, y + 0.5),
                    inside(&poly, x + 0.5, y + 5.0 / 6.0),
                    inside(&poly, x + 1.0 / 6.0, y + 0.5),
                ];
                let c00 = (a, b);
                let c10 = (a + 1, b);
                let c01 = (a, b + 1);
                let c11 = (a + 1, b + 1);
                match q {
                    [true, true, true, true] => {
                        for c in [c00, c10, c01, c11] {
                            put(c, 0.25 * h2);
                        }
                    }
                    [false, false, false, false] => {}
                    [true, true, false, false] => tri(&mut put, [c00, c10, c11], h2),
                    [false, false, true, true] => tri(&mut put, [c00, c01, c11], h2),
                    [true, false, false, true] => tri(&mut put, [c00, c10, c01], h2),
                    [false, true, true, false] => tri(&mut put, [c10, c01, c11], h2),
                    other => unreachable!("region edge crosses cell ({a}, {b}) as {other:?}"),
                }
            }
        }
        acc.into_iter().collect()
    }
}

fn tri(put: &mut impl FnMut((i64, i64), f64), c: [(i64, i64); 3], h2: f64) {
    for p in c {
        put(p, h2 / 6.0);
    }
}

fn inside(poly: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut c = false;
    let m = poly.len();
    for i in 0..m {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[(i + m - 1) % m];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            c = !c;
        }
    }
    c
}
