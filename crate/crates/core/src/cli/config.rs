//! TOML schemas for the three commands.
//!
//! Each command reads the whole file as a flat table. `--set key=value`
//! overrides are merged into the parsed table before it is deserialized, so
//! a config is never half-validated.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::lab::StudyPlan;
use crate::schemes::{Nonlinearity, Scheme, SchemeConfig};
use crate::spectral::SpectralState;

fn one() -> usize {
    1
}

fn default_kappa() -> f64 {
    100.0
}

fn default_initial() -> Vec<f64> {
    vec![0.5, 0.0, 0.6]
}

fn default_probes() -> Vec<f64> {
    vec![0.5]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryView {
    #[default]
    Spectral,
    Grid,
    None,
}

/// A single solver run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub scheme: Scheme,
    pub hurst: f64,
    /// Euler: step count. Milstein: dyadic exponent.
    pub time_mesh: usize,
    pub modes: usize,
    /// Strength of `f_k(x) = k(1 − x)/(1 + x²)`.
    pub k: f64,
    pub seed: u64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "one")]
    pub components: usize,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub gamma_prime: Option<f64>,
    #[serde(default = "one")]
    pub oversample: usize,
    /// Coefficients `a_n` of `ψ = Σ a_n sin(nπξ)`.
    #[serde(default = "default_initial")]
    pub initial: Vec<f64>,
    #[serde(default = "default_probes")]
    pub probes: Vec<f64>,
    #[serde(default)]
    pub trajectory: TrajectoryView,
    /// Interior points of the grid view; defaults to the mode count.
    #[serde(default)]
    pub grid_size: Option<usize>,
}

impl SimulateConfig {
    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        if self.components == 0 {
            return Err(Error::Config("components must be at least 1".into()));
        }
        if self.modes == 0 {
            return Err(Error::Config("modes must be at least 1".into()));
        }
        if !self.k.is_finite() {
            return Err(Error::Config(format!("k must be finite, got {}", self.k)));
        }
        if let Some(xi) = self.probes.iter().find(|xi| !(**xi >= 0.0 && **xi <= 1.0)) {
            return Err(Error::Config(format!("probe point {xi} outside [0,1]")));
        }
        if self.trajectory == TrajectoryView::Grid && self.grid_size.is_some_and(|g| g < self.modes) {
            return Err(Error::Config("grid_size must be at least modes".into()));
        }
        if self.scheme == Scheme::Milstein && self.time_mesh > 24 {
            return Err(Error::Config(format!("time_mesh exponent {} is too large", self.time_mesh)));
        }
        let cfg = SchemeConfig {
            scheme: self.scheme,
            time_mesh: self.time_mesh,
            modes: self.modes,
            hurst: self.hurst,
            gamma: self.gamma,
            gamma_prime: self.gamma_prime,
            kappa: self.kappa,
            nonlinearity: Nonlinearity::rational(self.k, self.components),
            initial: initial_state(&self.initial, self.modes)?,
            seed: self.seed,
            oversample: self.oversample,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn initial_state(raw: &[f64], dim: usize) -> Result<SpectralState> {
    if raw.is_empty() {
        return Err(Error::Config("initial needs at least one coefficient".into()));
    }
    SpectralState::from_sine_coefficients(raw, dim)
        .map_err(|e| Error::Config(format!("initial: {e}")))
}

/// A convergence study; unset fields take the scheme's default plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub scheme: Scheme,
    pub hurst: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_prime: Option<f64>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub mesh_ladder: Option<Vec<usize>>,
    pub mode_ladder: Option<Vec<usize>>,
    pub reference_mesh: Option<usize>,
    pub reference_modes: Option<usize>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub kappa: Option<f64>,
    pub k: Option<f64>,
    pub components: Option<usize>,
    pub initial: Option<Vec<f64>>,
    pub oversample: Option<usize>,
    pub tolerance: Option<f64>,
    pub drop_finest: Option<bool>,
    /// Also run Euler against the Milstein reference.
    pub compare: Option<bool>,
}

impl ConvergeConfig {
    pub fn plan(&self) -> Result<StudyPlan> {
        let mut p = match self.scheme {
            Scheme::Euler => StudyPlan::default_euler(),
            Scheme::Milstein => StudyPlan::default_milstein(),
        };
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { p.$f = v.clone(); } )* };
        }
        take!(hurst, gamma, gamma_prime, mesh_ladder, mode_ladder, reference_mesh, reference_modes,
              replications, seed, kappa, oversample, tolerance, drop_finest);
        p.beta = self.beta;
        p.lambda = self.lambda;
        let m = self.components.unwrap_or(1);
        if m == 0 {
            return Err(Error::Config("components must be at least 1".into()));
        }
        p.nonlinearity = Nonlinearity::rational(self.k.unwrap_or(1.0), m);
        if let Some(raw) = &self.initial {
            p.initial = initial_state(raw, raw.len())?;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn compare(&self) -> bool {
        self.compare.unwrap_or(self.scheme == Scheme::Milstein)
    }
}

fn default_fine_steps() -> usize {
    1 << 12
}

fn default_stats_ladder() -> Vec<usize> {
    (4..=10).map(|e| 1usize << e).collect()
}

fn default_seeds() -> usize {
    50
}

/// Driver diagnostics over many seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverStatsConfig {
    pub hurst: f64,
    pub gamma: f64,
    #[serde(default = "default_fine_steps")]
    pub fine_steps: usize,
    /// Coarse step counts, each dividing `fine_steps`.
    #[serde(default = "default_stats_ladder")]
    pub mesh_ladder: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default = "one_u64")]
    pub seed: u64,
    #[serde(default = "one")]
    pub components: usize,
}

fn one_u64() -> u64 {
    1
}

impl DriverStatsConfig {
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return cfg(format!("hurst must lie in (0,1), got {}", self.hurst));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return cfg(format!("gamma must lie in (0,1), got {}", self.gamma));
        }
        if self.seeds == 0 || self.components == 0 || self.fine_steps == 0 {
            return cfg("seeds, components and fine_steps must be at least 1".into());
        }
        if self.mesh_ladder.is_empty() {
            return cfg("mesh_ladder must be nonempty".into());
        }
        if let Some(m) = self.mesh_ladder.iter().find(|m| **m == 0 || self.fine_steps % **m != 0) {
            return cfg(format!("mesh {m} does not divide fine_steps = {}", self.fine_steps));
        }
        Ok(())
    }
}

/// Parses the config file (or an empty table) and applies overrides.
pub fn load_table(path: Option<&Path>, overrides: &[String]) -> Result<Table> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                Error::Config(format!("cannot read {}: {e}", p.display()))
            })?;
            text.parse::<Table>()
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    Ok(table)
}

/// `a.b=value`; the value is read as a TOML literal, or as a bare string if
/// that fails.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("override `{assignment}` has an empty key")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));

    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("nonempty key");
    let mut cur = table;
    for p in parts {
        cur = match cur.entry(p).or_insert_with(|| Value::Table(Table::new())) {
            Value::Table(t) => t,
            _ => return Err(Error::Config(format!("override `{key}`: `{p}` is not a table"))),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Deserializes a table, turning schema errors into config errors.
pub fn parse<T: serde::de::DeserializeOwned>(table: Table) -> Result<T> {
    Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.message().trim().to_string()))
}
