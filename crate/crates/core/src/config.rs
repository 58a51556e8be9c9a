//! Run configuration: a single TOML file with a versioned schema.
//!
//! ```toml
//! schema = "mkg-run/1"
//! seed = 7
//!
//! [grid]
//! v_max = 32.0
//! n = 2048
//! r_foliation = 2.0
//!
//! [data]
//! source = "profile"
//! family = "compact-bump"
//! amplitude = 1.0
//! center = 6.0
//! width = 1.0
//! winding = 1
//! lambda = 1.0
//! ```
//!
//! Every other section has defaults. Constraints are checked at parse time.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{constraint, Error, Result};
use crate::evolve::EvolveConfig;
use crate::fields::CheckpointFormat;
use crate::initdata::{Coulomb, DataProfile, FreeWave, InitialSlice, RadialData};
use crate::nullgrid::{GridSpec, NullGrid};

pub const SCHEMA: &str = "mkg-run/1";

/// Where the data, and with it the total charge `q₀`, comes from.
///
/// A profile is charged through its phase winding `m λ`; the free wave is
/// real and chargeless; the Coulomb source is vacuum plus a point charge and
/// needs `row_limit` to keep the march off the axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum DataSource {
    Profile(DataProfile),
    FreeWave(FreeWave),
    Coulomb(Coulomb),
}

impl Default for DataSource {
    fn default() -> Self {
        Self::Profile(DataProfile::default())
    }
}

impl DataSource {
    pub fn radial(&self) -> Arc<dyn RadialData> {
        match *self {
            Self::Profile(p) => Arc::new(p),
            Self::FreeWave(f) => Arc::new(f),
            Self::Coulomb(c) => Arc::new(c),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Profile(_) => "profile",
            Self::FreeWave(_) => "free-wave",
            Self::Coulomb(_) => "coulomb",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    pub gamma0: f64,
    /// Target decay exponent; `0 < γ < γ₀`.
    pub gamma: f64,
    /// Morawetz weight exponent.
    pub eps: f64,
    pub p_list: Vec<f64>,
}

impl Default for Physics {
    fn default() -> Self {
        Self { gamma0: 1.0, gamma: 0.8, eps: 0.1, p_list: vec![0.0, 0.5, 1.0, 1.8] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Diagnostics {
    /// Spacing of the interior leaves; rounded to the lattice.
    pub leaf_spacing: f64,
    /// Last interior leaf; `None` takes the last one with a nonempty cone.
    pub tau_max: Option<f64>,
    /// Spacing of the exterior leaves; 0 skips them.
    pub exterior_spacing: f64,
    pub fit_window: [f64; 2],
    /// Allowed growth of `Q(τ)(1+τ)^e` over its value at the window start.
    pub bound_factor: f64,
    /// Rerun on a domain of twice the size and record the change of the decay statistics.
    pub truncation_check: bool,
    pub truncation_tolerance: f64,
    /// Largest relative change a residual gauge map may cause.
    pub gauge_tolerance: f64,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            leaf_spacing: 1.0,
            tau_max: None,
            exterior_spacing: 1.0,
            fit_window: [10.0, 80.0],
            bound_factor: 10.0,
            truncation_check: false,
            truncation_tolerance: 0.2,
            gauge_tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    /// Relative paths resolve against `MKG_OUTPUT_ROOT` (or the working directory).
    pub dir: String,
    /// Rows between intermediate checkpoints; 0 writes the final state only.
    pub cadence: usize,
    pub format: CheckpointFormat,
    /// Skip the final checkpoint; large grids make it big.
    pub checkpoint: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: "run".into(), cadence: 0, format: CheckpointFormat::Binary, checkpoint: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub data: DataSource,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    #[serde(default)]
    pub output: Output,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA.into(),
            seed: 0,
            grid: GridSpec::default(),
            data: DataSource::default(),
            physics: Physics::default(),
            evolve: EvolveConfig::default(),
            diagnostics: Diagnostics::default(),
            output: Output::default(),
        }
    }
}

impl RunConfig {
    /// Parse and validate.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(constraint(format!("unknown schema {:?}; expected {SCHEMA:?}", self.schema)));
        }
        let r = self.grid.r_foliation;
        if !(r > 1.0) {
            return Err(constraint(format!("R = {r} violates R > 1")));
        }
        let Physics { gamma0, gamma, eps, ref p_list } = self.physics;
        if !(gamma0 > 0.0 && gamma0 <= 1.0) {
            return Err(constraint(format!("gamma0 = {gamma0} violates 0 < gamma0 <= 1")));
        }
        if !(gamma > 0.0 && gamma < gamma0) {
            return Err(constraint(format!("gamma = {gamma} violates 0 < gamma < gamma0 = {gamma0}")));
        }
        if !(eps > 0.0 && eps < 0.25) {
            return Err(constraint(format!("eps = {eps} violates 0 < eps < 1/4")));
        }
        for &p in p_list {
            if !(p >= 0.0 && p <= 1.0 + gamma) {
                return Err(constraint(format!("p = {p} violates p in [0, 1 + gamma] = [0, {}]", 1.0 + gamma)));
            }
        }
        let d = &self.diagnostics;
        if !(d.leaf_spacing > 0.0) || d.exterior_spacing < 0.0 {
            return Err(constraint("leaf spacings must be positive"));
        }
        if !(d.fit_window[0] < d.fit_window[1]) {
            return Err(constraint("fit window must satisfy lo < hi"));
        }
        if !(d.bound_factor > 0.0) {
            return Err(constraint("bound factor must be positive"));
        }
        self.evolve.validate()?;
        let grid = NullGrid::new(self.grid)?;
        match self.data {
            DataSource::Profile(p) => p.validate(&grid, gamma0)?,
            DataSource::FreeWave(f) => {
                if !(f.width > 0.0) {
                    return Err(constraint("free-wave width must be positive"));
                }
            }
            DataSource::Coulomb(c) => {
                if !c.q0.is_finite() {
                    return Err(constraint("non-finite Coulomb charge"));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<NullGrid> {
        NullGrid::new(self.grid)
    }

    pub fn slice(&self, grid: &NullGrid) -> Result<InitialSlice> {
        InitialSlice::build(self.data.radial(), grid)
    }

    /// Interior leaf times `0, s, 2s, ...` on the lattice.
    pub fn interior_taus(&self, grid: &NullGrid) -> Vec<f64> {
        let hi = self.diagnostics.tau_max.unwrap_or(f64::INFINITY);
        grid.lattice_taus(0.0, hi, self.diagnostics.leaf_spacing)
    }

    /// Exterior leaf times, from the most negative one up to (excluding) 0.
    pub fn exterior_taus(&self, grid: &NullGrid) -> Vec<f64> {
        let s = self.diagnostics.exterior_spacing;
        if s == 0.0 {
            return Vec::new();
        }
        let mut t = grid.lattice_taus(f64::NEG_INFINITY, 0.0, s);
        t.retain(|&x| x < 0.0);
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = RunConfig::parse("schema = \"mkg-run/1\"\n").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn rejects_r_equal_one() {
        let e = RunConfig::parse("schema = \"mkg-run/1\"\n[grid]\nv_max = 32.0\nn = 512\nr_foliation = 1.0\n").unwrap_err();
        assert!(e.to_string().contains("R > 1"), "{e}");
    }

    #[test]
    fn rejects_gamma_at_gamma0_and_p_beyond_range() {
        let mut cfg = RunConfig::default();
        cfg.physics.gamma = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.physics.p_list = vec![1.9];
        assert!(cfg.validate().unwrap_err().to_string().contains("p = 1.9"));
        let mut cfg = RunConfig::default();
        cfg.physics.eps = 0.25;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_keys_and_schema_are_rejected() {
        assert!(RunConfig::parse("schema = \"mkg-run/2\"\n").is_err());
        assert!(RunConfig::parse("schema = \"mkg-run/1\"\nfoo = 1\n").is_err());
    }

    #[test]
    fn every_source_round_trips() {
        for data in [
            DataSource::default(),
            DataSource::FreeWave(FreeWave::default()),
            DataSource::Coulomb(Coulomb { q0: -3.5 }),
        ] {
            let cfg = RunConfig { data, seed: 11, ..RunConfig::default() };
            let text = cfg.to_toml().unwrap();
            assert_eq!(RunConfig::parse(&text).unwrap(), cfg, "{text}");
        }
    }
}
