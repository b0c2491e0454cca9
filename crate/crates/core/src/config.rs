//! Flat `key = value` run configuration and the named presets.
//!
//! ```text
//! # replica-edge point
//! omega = 2.3025
//! chi = 1.081978
//! initial = B
//! preset = desk
//! ```

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{DispersionVariant, SolverOptions};
use crate::evolution::{EvolutionConfig, EvolutionError, EvolutionPreset};
use crate::model::{Level, ModelConfig, ModelError, ValidatedConfig};

/// Frequency used when nothing else picks one.
pub const DEFAULT_OMEGA: f64 = 2.3025;
/// Maximizes `|J0(chi) J1(chi)|`.
pub const CHI_STAR: f64 = 1.081978;
/// First zero of `J0`.
pub const CHI_J0_ZERO: f64 = 2.404826;

pub const KNOWN_KEYS: [&str; 24] = [
    "e0",
    "beta",
    "eA",
    "eB",
    "gA",
    "gB",
    "omega",
    "alpha",
    "chi",
    "M",
    "w",
    "gamma0",
    "p",
    "dt",
    "t_max",
    "stride",
    "initial",
    "preset",
    "variant",
    "seed_re",
    "seed_im",
    "channels",
    "truncation_tol",
    "max_iter",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key '{key}' given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("key '{key}': cannot parse '{value}' ({reason})")]
    BadValue { key: String, value: String, reason: String },
    #[error("give either alpha or chi, not both")]
    AlphaAndChi,
    #[error("unknown preset '{0}' (expected desk, paper, fig3, fig4a, fig4b or table-gammaB)")]
    UnknownPreset(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
}

/// Root-finding choices carried by a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub variant: DispersionVariant,
    pub seed: Option<Complex64>,
    /// Fixed channel cutoff; `None` raises it until the pole settles.
    pub channels: Option<usize>,
    pub truncation_tol: f64,
    pub options: SolverOptions,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            variant: DispersionVariant::ScalarB0Exact,
            seed: None,
            channels: None,
            truncation_tol: crate::analysis::DEFAULT_TRUNCATION_TOL,
            options: SolverOptions::default(),
        }
    }
}

/// Everything a subcommand needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub evolution: EvolutionConfig,
    pub solver: SolverSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig::replica_edge(DEFAULT_OMEGA, CHI_STAR),
            evolution: EvolutionConfig::desk(Level::B),
            solver: SolverSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn validated_model(&self) -> Result<ValidatedConfig, ConfigError> {
        Ok(self.model.validate()?)
    }

    /// Checks the model and evolution blocks together.
    pub fn validate(&self) -> Result<ValidatedConfig, ConfigError> {
        let model = self.validated_model()?;
        self.evolution.validate()?;
        Ok(model)
    }

    /// Applies `text` on top of `self`.
    pub fn apply_str(mut self, text: &str) -> Result<Self, ConfigError> {
        let entries = parse_entries(text)?;
        let has = |k: &str| entries.iter().any(|(_, key, _)| key == k);
        if has("alpha") && has("chi") {
            return Err(ConfigError::AlphaAndChi);
        }
        // The preset goes first so explicit keys override it.
        if let Some((_, _, v)) = entries.iter().find(|(_, k, _)| k == "preset") {
            self = Preset::from_str(v)?.apply(self);
        }
        let chi_before = self.model.alpha / self.model.omega;
        let mut chi = None;
        for (_, key, value) in &entries {
            let num = || parse_value::<f64>(key, value);
            let model = &mut self.model;
            let evo = &mut self.evolution;
            let solver = &mut self.solver;
            match key.as_str() {
                "e0" => model.e0 = num()?,
                "beta" => model.beta = num()?,
                "eA" => model.e_a = num()?,
                "eB" => model.e_b = num()?,
                "gA" => model.g_a = num()?,
                "gB" => model.g_b = num()?,
                "omega" => model.omega = num()?,
                "alpha" => model.alpha = num()?,
                "chi" => chi = Some(num()?),
                "M" => evo.half_length = parse_value(key, value)?,
                "w" => evo.cap_width = parse_value(key, value)?,
                "gamma0" => evo.gamma0 = num()?,
                "p" => evo.cap_exponent = num()?,
                "dt" => evo.dt = num()?,
                "t_max" => evo.t_max = num()?,
                "stride" => evo.sample_stride = Some(parse_value(key, value)?),
                "initial" => evo.initial = parse_level(value)?,
                "preset" => {}
                "variant" => solver.variant = parse_value(key, value)?,
                "seed_re" => solver.seed.get_or_insert(self.model.e_b.into()).re = num()?,
                "seed_im" => solver.seed.get_or_insert(self.model.e_b.into()).im = num()?,
                "channels" => solver.channels = Some(parse_value(key, value)?),
                "truncation_tol" => solver.truncation_tol = num()?,
                "max_iter" => solver.options.max_iter = parse_value(key, value)?,
                _ => unreachable!("keys are checked while parsing"),
            }
        }
        // chi refers to whatever frequency the file ends up with, and a new
        // frequency without an amplitude keeps the previous chi.
        if let Some(chi) = chi {
            self.model.alpha = chi * self.model.omega;
        } else if has("omega") && !has("alpha") {
            self.model.alpha = chi_before * self.model.omega;
        }
        Ok(self)
    }

    pub fn apply_file(self, path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        self.apply_str(&text)
    }
}

fn parse_entries(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) =
            body.split_once('=').ok_or_else(|| ConfigError::Syntax { line, text: raw.trim().to_string() })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax { line, text: raw.trim().to_string() });
        }
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.to_string() });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
        }
        entries.push((line, key.to_string(), value.to_string()));
    }
    Ok(entries)
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

pub fn parse_level(value: &str) -> Result<Level, ConfigError> {
    match value.trim() {
        "A" | "a" => Ok(Level::A),
        "B" | "b" => Ok(Level::B),
        other => {
            Err(ConfigError::BadValue { key: "initial".into(), value: other.into(), reason: "expected A or B".into() })
        }
    }
}

/// Named configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// Integration profile only.
    Evolution(EvolutionPreset),
    /// `omega = 2.3025`, `chi = 1.081978`, B prepared: decay of B near the
    /// n = 1 replica edge.
    Fig3,
    /// Same point, both levels prepared in turn: B decays, A survives.
    Fig4a,
    /// `omega = 2.2`, `chi = 2.404826`: A decays, B is protected.
    Fig4b,
    /// Five frequencies across the n = 1 edge, poles only.
    TableGammaB,
}

impl Preset {
    pub const FIGURES: [Preset; 4] = [Preset::Fig3, Preset::Fig4a, Preset::Fig4b, Preset::TableGammaB];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Evolution(EvolutionPreset::Desk) => "desk",
            Preset::Evolution(EvolutionPreset::Paper) => "paper",
            Preset::Fig3 => "fig3",
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
            Preset::TableGammaB => "table-gammaB",
        }
    }

    /// Model parameters of a figure preset.
    pub fn model(self) -> Option<ModelConfig> {
        match self {
            Preset::Evolution(_) => None,
            Preset::Fig3 | Preset::Fig4a | Preset::TableGammaB => {
                Some(ModelConfig::replica_edge(DEFAULT_OMEGA, CHI_STAR))
            }
            Preset::Fig4b => Some(ModelConfig::replica_edge(2.2, CHI_J0_ZERO)),
        }
    }

    /// Levels prepared by the figure's trajectories.
    pub fn initial_levels(self) -> &'static [Level] {
        match self {
            Preset::Fig3 => &[Level::B],
            Preset::Fig4a | Preset::Fig4b => &[Level::A, Level::B],
            Preset::Evolution(_) | Preset::TableGammaB => &[],
        }
    }

    pub fn apply(self, mut run: RunConfig) -> RunConfig {
        match self {
            Preset::Evolution(p) => run.evolution = EvolutionConfig::preset(p, run.evolution.initial),
            figure => {
                run.model = figure.model().expect("figure presets carry a model");
                let initial = figure.initial_levels().last().copied().unwrap_or(Level::B);
                run.evolution = EvolutionConfig::desk(initial);
            }
        }
        run
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "desk" => Ok(Preset::Evolution(EvolutionPreset::Desk)),
            "paper" => Ok(Preset::Evolution(EvolutionPreset::Paper)),
            "fig3" => Ok(Preset::Fig3),
            "fig4a" => Ok(Preset::Fig4a),
            "fig4b" => Ok(Preset::Fig4b),
            "table-gammab" | "table_gammab" | "tablegammab" => Ok(Preset::TableGammaB),
            _ => Err(ConfigError::UnknownPreset(s.to_string())),
        }
    }
}
