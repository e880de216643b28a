//! Run configuration, read from TOML.
//!
//! Shared keys live at the top level; scenario-specific keys live in
//! `[homogeneous]` or in `[grid]`, `[domain]` and `[flow]` for the plate
//! problem. Lengths in `[domain]` are in units of the plate length, `dt` is in
//! units of the reference relaxation time. See `configs/` for complete files.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::gas::Interaction;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Homogeneous,
    ShockPlate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[serde(alias = "linear_fp")]
    Linear,
    #[serde(alias = "cubic_fp")]
    Cubic,
    Fefp,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub scenario: Scenario,
    pub model: ModelKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub n_particles: usize,
    pub dt: f64,
    pub steps_transient: u64,
    #[serde(default)]
    pub steps_average: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_output_every")]
    pub output_every: u64,
    #[serde(default = "default_interaction")]
    pub interaction: Interaction,
    #[serde(default)]
    pub closure: ClosureConfig,
    pub homogeneous: Option<HomogeneousConfig>,
    pub grid: Option<GridConfig>,
    pub domain: Option<DomainConfig>,
    pub flow: Option<FlowConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureConfig {
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    #[serde(default = "default_regularization")]
    pub schur_regularization: f64,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        ClosureConfig { eps0: default_eps0(), schur_regularization: default_regularization() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Gaussian with covariance `diag(lambda)`.
    Anisotropic { lambda: [f64; 3] },
    /// Two Gaussians along `v_1` with unit total covariance and heat flux `q_1 = heat_flux`.
    BiGaussian { heat_flux: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneousConfig {
    pub initial: InitialCondition,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub lx: f64,
    pub ly: f64,
    #[serde(default = "default_slice")]
    pub slice_x2: f64,
    #[serde(default = "default_true")]
    pub plate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub mach: f64,
    pub knudsen: f64,
}

fn default_seed() -> u64 {
    1
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}
fn default_output_every() -> u64 {
    1
}
fn default_interaction() -> Interaction {
    Interaction::Maxwell
}
fn default_eps0() -> f64 {
    1e-3
}
fn default_regularization() -> f64 {
    1e-2
}
fn default_slice() -> f64 {
    1.875
}
fn default_true() -> bool {
    true
}

/// Largest heat flux a unit-covariance bi-Gaussian with weight 1/4 can carry.
pub const MAX_BI_GAUSSIAN_Q: f64 = 0.577;

impl SimulationConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: SimulationConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        Self::from_toml(&text)
    }

    pub fn total_steps(&self) -> u64 {
        self.steps_transient + self.steps_average
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.n_particles < 1000 {
            return bad(format!("n_particles must be at least 1000, got {}", self.n_particles));
        }
        if self.total_steps() == 0 {
            return bad("no time steps requested".into());
        }
        if self.output_every == 0 {
            return bad("output_every must be at least 1".into());
        }
        if !(self.closure.eps0 >= 0.0) || !(self.closure.schur_regularization >= 0.0) {
            return bad("closure parameters must be non-negative".into());
        }
        match self.scenario {
            Scenario::Homogeneous => {
                let Some(h) = &self.homogeneous else {
                    return bad("homogeneous scenario needs a [homogeneous] section".into());
                };
                match h.initial {
                    InitialCondition::Anisotropic { lambda } => {
                        if lambda.iter().any(|l| !(*l > 0.0)) {
                            return bad(format!("lambda must be positive, got {lambda:?}"));
                        }
                    }
                    InitialCondition::BiGaussian { heat_flux } => {
                        if !(heat_flux.abs() < MAX_BI_GAUSSIAN_Q) {
                            return bad(format!("|heat_flux| must be below {MAX_BI_GAUSSIAN_Q}, got {heat_flux}"));
                        }
                    }
                }
            }
            Scenario::ShockPlate => {
                let (Some(g), Some(d), Some(f)) = (&self.grid, &self.domain, &self.flow) else {
                    return bad("shock_plate scenario needs [grid], [domain] and [flow] sections".into());
                };
                if g.nx == 0 || g.ny == 0 {
                    return bad("grid must have at least one cell per direction".into());
                }
                if !(d.lx > 0.0 && d.ly > 0.0) {
                    return bad("domain extents must be positive".into());
                }
                if d.plate && d.ly <= 1.0 {
                    return bad("domain must be taller than the plate (ly > 1)".into());
                }
                if !(d.slice_x2 >= 0.0 && d.slice_x2 < d.ly) {
                    return bad(format!("slice_x2 = {} lies outside the domain", d.slice_x2));
                }
                if !(f.knudsen > 0.0) {
                    return bad(format!("knudsen must be positive, got {}", f.knudsen));
                }
                if !(f.mach >= 0.0) {
                    return bad(format!("mach must be non-negative, got {}", f.mach));
                }
            }
        }
        Ok(())
    }
}
