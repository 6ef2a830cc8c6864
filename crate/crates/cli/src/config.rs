//! JSON scenario files.
//!
//! Every section is optional and falls back to the small-cell defaults; the
//! only required key is `schema`. Unknown keys are rejected everywhere.

use std::path::Path;

use cachealloc::model::{normalized_cache, CellSpec, PopularityModel, RadioParams};
use cachealloc::optimizer::DEFAULT_EPSILON;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    #[serde(default)]
    pub radio: RadioConfig,
    /// Needed only when a cell gives its cache in bits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file_length_bits: Option<f64>,
    #[serde(default)]
    pub popularity: PopularityConfig,
    #[serde(default = "default_cells")]
    pub cells: Vec<CellConfig>,
    #[serde(default)]
    pub tradeoff: TradeoffConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub allocate: AllocateConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub radius_m: f64,
    pub pathloss_exp: f64,
    pub noise_dbm: f64,
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    pub rate_target_bps: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        let r = RadioParams::small_cell();
        Self {
            radius_m: r.radius_m(),
            pathloss_exp: r.pathloss_exp(),
            noise_dbm: r.noise_dbm(),
            bandwidth_hz: r.bandwidth_hz(),
            tx_power_w: r.tx_power_w(),
            rate_target_bps: r.rate_target_bps(),
        }
    }
}

/// Per-cell replacement of individual radio fields.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pathloss_exp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_target_bps: Option<f64>,
}

impl RadioConfig {
    fn apply(&self, o: &RadioOverride) -> RadioConfig {
        RadioConfig {
            radius_m: o.radius_m.unwrap_or(self.radius_m),
            pathloss_exp: o.pathloss_exp.unwrap_or(self.pathloss_exp),
            noise_dbm: o.noise_dbm.unwrap_or(self.noise_dbm),
            bandwidth_hz: o.bandwidth_hz.unwrap_or(self.bandwidth_hz),
            tx_power_w: o.tx_power_w.unwrap_or(self.tx_power_w),
            rate_target_bps: o.rate_target_bps.unwrap_or(self.rate_target_bps),
        }
    }

    fn build(&self, field: &str) -> Result<RadioParams, CliError> {
        RadioParams::new(
            self.radius_m,
            self.pathloss_exp,
            self.noise_dbm,
            self.bandwidth_hz,
            self.tx_power_w,
            self.rate_target_bps,
        )
        .map_err(|e| CliError::field(field, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopularityConfig {
    pub library_size: usize,
    pub zipf_exp: f64,
}

impl Default for PopularityConfig {
    fn default() -> Self {
        Self {
            library_size: 1000,
            zipf_exp: 0.56,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    pub users: u32,
    #[serde(default)]
    pub backhaul_mbps: f64,
    /// Cache size in files; at most one of this and `cache_bits`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_files: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "is_default_override")]
    pub radio: RadioOverride,
}

fn is_default_override(o: &RadioOverride) -> bool {
    *o == RadioOverride::default()
}

impl CellConfig {
    pub fn new(users: u32, backhaul_mbps: f64) -> Self {
        Self {
            users,
            backhaul_mbps,
            cache_files: None,
            cache_bits: None,
            radio: RadioOverride::default(),
        }
    }
}

/// Grid of minimum-cache queries over backhaul capacity and USP threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TradeoffConfig {
    pub users: u32,
    pub thetas: Vec<f64>,
    pub backhaul_mbps: Vec<f64>,
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        Self {
            users: 15,
            thetas: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            backhaul_mbps: (0..=14).map(|i| 2.0 * i as f64).collect(),
        }
    }
}

/// Minimum cache against library size (per Zipf exponent) or against the
/// Zipf exponent (at the configured library size).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub users: u32,
    pub theta: f64,
    pub backhaul_mbps: f64,
    pub zipf_exps: Vec<f64>,
    pub library_sizes: Vec<usize>,
    pub gammas: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            users: 15,
            theta: 0.8,
            backhaul_mbps: 0.0,
            zipf_exps: vec![0.6, 0.8, 1.2, 1.5],
            library_sizes: vec![500, 1000, 2000, 4000],
            gammas: (1..=20).map(|i| i as f64 / 10.0).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllocateConfig {
    pub budgets: Vec<usize>,
}

impl Default for AllocateConfig {
    fn default() -> Self {
        Self {
            budgets: (0..=24).map(|i| 250 * i).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub trials: u64,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 1,
        }
    }
}

fn default_cells() -> Vec<CellConfig> {
    [0.0, 2.0, 6.0, 10.0, 20.0, 28.0]
        .into_iter()
        .map(|mbps| CellConfig::new(15, mbps))
        .collect()
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            radio: RadioConfig::default(),
            file_length_bits: None,
            popularity: PopularityConfig::default(),
            cells: default_cells(),
            tradeoff: TradeoffConfig::default(),
            sweep: SweepConfig::default(),
            allocate: AllocateConfig::default(),
            simulation: SimulationConfig::default(),
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl ScenarioConfig {
    /// Parses and validates a scenario document.
    ///
    /// Errors name the offending field path and, for syntax or type errors,
    /// the line and column.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("{path}: {}", e.into_inner()))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks every value the commands will later rely on.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema: unsupported version {}, expected {SCHEMA_VERSION}",
                self.schema
            )));
        }
        self.radio.build("radio")?;
        self.popularity()?;
        if let Some(l) = self.file_length_bits {
            if !(l > 0.0 && l.is_finite()) {
                return Err(CliError::Config(format!(
                    "file_length_bits: must be positive and finite, got {l}"
                )));
            }
        }
        if self.cells.is_empty() {
            return Err(CliError::Config(
                "cells: at least one cell is required".into(),
            ));
        }
        self.cells()?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CliError::Config(format!(
                "epsilon: must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.simulation.trials == 0 {
            return Err(CliError::Config(
                "simulation.trials: must be at least 1".into(),
            ));
        }
        let t = &self.tradeoff;
        check_users("tradeoff.users", t.users)?;
        for (i, &theta) in t.thetas.iter().enumerate() {
            check_unit(&format!("tradeoff.thetas[{i}]"), theta)?;
        }
        for (i, &mbps) in t.backhaul_mbps.iter().enumerate() {
            check_backhaul(&format!("tradeoff.backhaul_mbps[{i}]"), mbps)?;
        }
        let s = &self.sweep;
        check_users("sweep.users", s.users)?;
        check_unit("sweep.theta", s.theta)?;
        check_backhaul("sweep.backhaul_mbps", s.backhaul_mbps)?;
        for (i, &g) in s.zipf_exps.iter().enumerate() {
            check_zipf(&format!("sweep.zipf_exps[{i}]"), g)?;
        }
        for (i, &g) in s.gammas.iter().enumerate() {
            check_zipf(&format!("sweep.gammas[{i}]"), g)?;
        }
        for (i, &f) in s.library_sizes.iter().enumerate() {
            if f == 0 {
                return Err(CliError::Config(format!(
                    "sweep.library_sizes[{i}]: must be at least 1"
                )));
            }
        }
        Ok(())
    }

    pub fn popularity(&self) -> Result<PopularityModel, CliError> {
        PopularityModel::new(self.popularity.library_size, self.popularity.zipf_exp)
            .map_err(|e| CliError::field("popularity", e))
    }

    pub fn radio(&self) -> Result<RadioParams, CliError> {
        self.radio.build("radio")
    }

    /// The configured cells with radio overrides applied and cache sizes
    /// converted to files (absent caches are empty).
    pub fn cells(&self) -> Result<Vec<CellSpec>, CliError> {
        let library = self.popularity.library_size;
        self.cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let field = format!("cells[{i}]");
                let radio = self
                    .radio
                    .apply(&c.radio)
                    .build(&format!("{field}.radio"))?;
                let cache = match (c.cache_files, c.cache_bits) {
                    (Some(_), Some(_)) => {
                        return Err(CliError::Config(format!(
                            "{field}: give cache_files or cache_bits, not both"
                        )))
                    }
                    (Some(files), None) => files,
                    (None, Some(bits)) => {
                        let length = self.file_length_bits.ok_or_else(|| {
                            CliError::Config(format!(
                                "{field}.cache_bits: file_length_bits must be set"
                            ))
                        })?;
                        normalized_cache(bits, length)
                            .map_err(|e| CliError::field(&format!("{field}.cache_bits"), e))?
                    }
                    (None, None) => 0,
                };
                if cache > library {
                    return Err(CliError::Config(format!(
                        "{field}: cache of {cache} files exceeds the library of {library}"
                    )));
                }
                check_backhaul(&format!("{field}.backhaul_mbps"), c.backhaul_mbps)?;
                CellSpec::new(radio, c.users, c.backhaul_mbps * 1e6, cache)
                    .map_err(|e| CliError::field(&field, e))
            })
            .collect()
    }
}

fn check_users(field: &str, users: u32) -> Result<(), CliError> {
    if users == 0 {
        return Err(CliError::Config(format!("{field}: must be at least 1")));
    }
    Ok(())
}

fn check_unit(field: &str, x: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(CliError::Config(format!(
            "{field}: must lie in [0, 1], got {x}"
        )));
    }
    Ok(())
}

fn check_backhaul(field: &str, mbps: f64) -> Result<(), CliError> {
    if !(mbps >= 0.0 && mbps.is_finite()) {
        return Err(CliError::Config(format!(
            "{field}: must be nonnegative and finite, got {mbps}"
        )));
    }
    Ok(())
}

fn check_zipf(field: &str, g: f64) -> Result<(), CliError> {
    if !(g >= 0.0 && g.is_finite()) {
        return Err(CliError::Config(format!(
            "{field}: must be nonnegative and finite, got {g}"
        )));
    }
    Ok(())
}
