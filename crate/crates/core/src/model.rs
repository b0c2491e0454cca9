//! Static and drive parameters of the two-level chain model, plus the replica
//! band bookkeeping that decides which level can see which continuum copy.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Couplings above this fraction of `beta` leave the weak-coupling regime the
/// pole approximations are built for.
pub const WEAK_COUPLING_LIMIT: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("band parameter beta must be positive (got {0})")]
    NonPositiveBand(f64),
    #[error("drive frequency omega must be positive (got {0})")]
    NonPositiveFrequency(f64),
    #[error("coupling {name} must be non-negative (got {value})")]
    NegativeCoupling { name: &'static str, value: f64 },
    #[error("parameter {0} is not finite")]
    NonFinite(&'static str),
}

/// Discrete level label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    /// The driven level.
    A,
    /// The undriven level.
    B,
}

impl Level {
    pub fn other(self) -> Level {
        match self {
            Level::A => Level::B,
            Level::B => Level::A,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::A => write!(f, "A"),
            Level::B => write!(f, "B"),
        }
    }
}

/// Raw model parameters as supplied by the user.
///
/// The chain has on-site energy `e0` and hopping `beta / 2`, so its band is
/// `[e0 - beta, e0 + beta]`. Level A is driven as `eA + alpha cos(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub e0: f64,
    pub beta: f64,
    #[serde(rename = "eA")]
    pub e_a: f64,
    #[serde(rename = "eB")]
    pub e_b: f64,
    #[serde(rename = "gA")]
    pub g_a: f64,
    #[serde(rename = "gB")]
    pub g_b: f64,
    pub omega: f64,
    pub alpha: f64,
}

impl ModelConfig {
    /// Internal energies used throughout the replica-edge study:
    /// `e0 = 0, beta = 1, eA = 1.25, eB = 1.30, gA = gB = 0.05`, with the drive
    /// given by frequency and `chi = alpha / omega`.
    pub fn replica_edge(omega: f64, chi: f64) -> Self {
        ModelConfig { e0: 0.0, beta: 1.0, e_a: 1.25, e_b: 1.30, g_a: 0.05, g_b: 0.05, omega, alpha: chi * omega }
    }

    pub fn with_chi(mut self, chi: f64) -> Self {
        self.alpha = chi * self.omega;
        self
    }

    /// Changes the frequency while holding `chi` fixed.
    pub fn with_omega_fixed_chi(self, omega: f64) -> Self {
        let chi = self.alpha / self.omega;
        ModelConfig { omega, alpha: chi * omega, ..self }
    }

    pub fn with_couplings(mut self, g_a: f64, g_b: f64) -> Self {
        self.g_a = g_a;
        self.g_b = g_b;
        self
    }

    pub fn level_energy(&self, level: Level) -> f64 {
        match level {
            Level::A => self.e_a,
            Level::B => self.e_b,
        }
    }

    pub fn coupling(&self, level: Level) -> f64 {
        match level {
            Level::A => self.g_a,
            Level::B => self.g_b,
        }
    }

    pub fn validate(self) -> Result<ValidatedConfig, ModelError> {
        validate(self)
    }
}

/// Quantities derived from the drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveDerived {
    /// `alpha / omega`.
    pub chi: f64,
    /// `2 pi / omega`.
    pub period: f64,
}

/// A [`ModelConfig`] that passed validation, with drive-derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidatedConfig {
    #[serde(flatten)]
    config: ModelConfig,
    derived: DriveDerived,
    weak_coupling_advisory: bool,
}

impl ValidatedConfig {
    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn derived(&self) -> DriveDerived {
        self.derived
    }

    pub fn chi(&self) -> f64 {
        self.derived.chi
    }

    pub fn period(&self) -> f64 {
        self.derived.period
    }

    /// Set when a coupling exceeds [`WEAK_COUPLING_LIMIT`] times `beta`.
    pub fn weak_coupling_advisory(&self) -> bool {
        self.weak_coupling_advisory
    }

    pub fn replica_band(&self, n: i32) -> ReplicaBand {
        replica_band(self, n)
    }

    pub fn classify_levels(&self, max_channel: usize) -> ResonanceReport {
        classify_levels(self, max_channel)
    }
}

impl std::ops::Deref for ValidatedConfig {
    type Target = ModelConfig;

    fn deref(&self) -> &ModelConfig {
        &self.config
    }
}

pub fn validate(config: ModelConfig) -> Result<ValidatedConfig, ModelError> {
    let fields = [
        ("e0", config.e0),
        ("beta", config.beta),
        ("eA", config.e_a),
        ("eB", config.e_b),
        ("gA", config.g_a),
        ("gB", config.g_b),
        ("omega", config.omega),
        ("alpha", config.alpha),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            return Err(ModelError::NonFinite(name));
        }
    }
    if config.beta <= 0.0 {
        return Err(ModelError::NonPositiveBand(config.beta));
    }
    if config.omega <= 0.0 {
        return Err(ModelError::NonPositiveFrequency(config.omega));
    }
    if config.g_a < 0.0 {
        return Err(ModelError::NegativeCoupling { name: "gA", value: config.g_a });
    }
    if config.g_b < 0.0 {
        return Err(ModelError::NegativeCoupling { name: "gB", value: config.g_b });
    }
    // A negative amplitude is a half-period time shift of the drive.
    let chi = config.alpha.abs() / config.omega;
    let derived = DriveDerived { chi, period: TAU / config.omega };
    let weak_coupling_advisory =
        config.g_a / config.beta > WEAK_COUPLING_LIMIT || config.g_b / config.beta > WEAK_COUPLING_LIMIT;
    Ok(ValidatedConfig { config, derived, weak_coupling_advisory })
}

/// The `n`-th drive-shifted copy of the chain band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicaBand {
    pub n: i32,
    pub lower: f64,
    pub upper: f64,
}

impl ReplicaBand {
    pub fn contains(&self, energy: f64) -> bool {
        energy >= self.lower && energy <= self.upper
    }

    /// Absolute distance from `energy` to the closer of the two edges.
    pub fn edge_distance(&self, energy: f64) -> f64 {
        (energy - self.lower).abs().min((energy - self.upper).abs())
    }
}

pub fn replica_band(config: &ModelConfig, n: i32) -> ReplicaBand {
    let shift = f64::from(n) * config.omega;
    ReplicaBand { n, lower: config.e0 - config.beta + shift, upper: config.e0 + config.beta + shift }
}

/// Where a level energy sits relative to one replica band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicaMembership {
    pub n: i32,
    pub inside: bool,
    /// Signed offset from the lower edge (positive above it).
    pub above_lower: f64,
    /// Signed offset from the upper edge (positive below it).
    pub below_upper: f64,
    pub edge_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelClassification {
    pub level: Level,
    pub energy: f64,
    pub memberships: Vec<ReplicaMembership>,
}

impl LevelClassification {
    /// Channels whose replica band contains the level.
    pub fn inside_channels(&self) -> Vec<i32> {
        self.memberships.iter().filter(|m| m.inside).map(|m| m.n).collect()
    }

    pub fn is_inside_any(&self) -> bool {
        self.memberships.iter().any(|m| m.inside)
    }

    /// Membership record of the replica with the closest edge.
    pub fn nearest_edge(&self) -> &ReplicaMembership {
        self.memberships
            .iter()
            .min_by(|a, b| a.edge_distance.total_cmp(&b.edge_distance))
            .expect("classification always covers channel 0")
    }

    /// Short human-readable summary, e.g. `B below n=1 lower edge (distance 0.0025)`.
    pub fn describe(&self) -> String {
        let near = self.nearest_edge();
        if near.inside {
            return format!("{} inside n={} replica (edge distance {:.6})", self.level, near.n, near.edge_distance);
        }
        let side = if near.above_lower < 0.0 { "below" } else { "above" };
        let edge = if near.above_lower < 0.0 { "lower" } else { "upper" };
        format!(
            "{} outside all replicas, {} n={} {} edge (distance {:.6})",
            self.level, side, near.n, edge, near.edge_distance
        )
    }
}

/// Replica membership of both levels over channels `[-N, N]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub max_channel: usize,
    pub a: LevelClassification,
    pub b: LevelClassification,
}

impl ResonanceReport {
    pub fn level(&self, level: Level) -> &LevelClassification {
        match level {
            Level::A => &self.a,
            Level::B => &self.b,
        }
    }
}

/// Classifies an arbitrary energy against replicas `[-N, N]`.
pub fn classify_energy(config: &ModelConfig, level: Level, energy: f64, max_channel: usize) -> LevelClassification {
    let n_max = max_channel as i32;
    let memberships = (-n_max..=n_max)
        .map(|n| {
            let band = replica_band(config, n);
            ReplicaMembership {
                n,
                inside: band.contains(energy),
                above_lower: energy - band.lower,
                below_upper: band.upper - energy,
                edge_distance: band.edge_distance(energy),
            }
        })
        .collect();
    LevelClassification { level, energy, memberships }
}

pub fn classify_levels(config: &ModelConfig, max_channel: usize) -> ResonanceReport {
    ResonanceReport {
        max_channel,
        a: classify_energy(config, Level::A, config.e_a, max_channel),
        b: classify_energy(config, Level::B, config.e_b, max_channel),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn base(omega: f64) -> ValidatedConfig {
        ModelConfig::replica_edge(omega, 1.081978).validate().unwrap()
    }

    #[test]
    fn chi_from_alpha() {
        let cfg = ModelConfig { alpha: 2.4913, ..ModelConfig::replica_edge(2.3025, 0.0) };
        let v = cfg.validate().unwrap();
        // 2.4913 carries five significant digits, so chi is good to ~2e-5.
        assert!((v.chi() - 1.081978).abs() < 3e-5, "chi = {}", v.chi());
        let exact = ModelConfig::replica_edge(2.3025, 1.081978).validate().unwrap();
        assert!((exact.chi() - 1.081978).abs() < 1e-12);
    }

    #[test]
    fn undriven_limit() {
        let cfg = ModelConfig { omega: 1.0, alpha: 0.0, ..ModelConfig::replica_edge(1.0, 0.0) };
        let v = cfg.validate().unwrap();
        assert_eq!(v.chi(), 0.0);
        assert!((v.period() - TAU).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        let good = ModelConfig::replica_edge(2.3, 1.0);
        assert_eq!(ModelConfig { beta: -1.0, ..good }.validate(), Err(ModelError::NonPositiveBand(-1.0)));
        assert_eq!(ModelConfig { omega: 0.0, ..good }.validate(), Err(ModelError::NonPositiveFrequency(0.0)));
        assert!(matches!(
            ModelConfig { g_b: -0.1, ..good }.validate(),
            Err(ModelError::NegativeCoupling { name: "gB", .. })
        ));
        assert!(matches!(ModelConfig { e_a: f64::NAN, ..good }.validate(), Err(ModelError::NonFinite("eA"))));
    }

    #[test]
    fn weak_coupling_flag() {
        assert!(!base(2.3).weak_coupling_advisory());
        let strong = ModelConfig::replica_edge(2.3, 1.0).with_couplings(0.3, 0.05);
        assert!(strong.validate().unwrap().weak_coupling_advisory());
    }

    #[test]
    fn replica_band_examples() {
        let band = base(2.3).replica_band(1);
        assert!((band.lower - 1.3).abs() < 1e-12 && (band.upper - 3.3).abs() < 1e-12);
        let band0 = base(2.3).replica_band(0);
        assert_eq!((band0.lower, band0.upper), (-1.0, 1.0));
        let band = base(2.2).replica_band(1);
        assert!((band.lower - 1.2).abs() < 1e-12 && (band.upper - 3.2).abs() < 1e-12);
        assert!(band.contains(1.25));
    }

    #[test]
    fn level_b_relative_to_first_replica() {
        // Lower edge of n=1 at omega=2.3025 is 1.3025, so the bare level sits
        // 0.0025 below it. The level shift of the pole is what carries it inside.
        let report = base(2.3025).classify_levels(2);
        assert!(!report.b.is_inside_any());
        let near = report.b.nearest_edge();
        assert_eq!(near.n, 1);
        assert!((near.above_lower + 0.0025).abs() < 1e-12);
        assert!((near.edge_distance - 0.0025).abs() < 1e-12);

        let report = base(2.3040).classify_levels(2);
        assert!(!report.b.is_inside_any());
        assert!(report.b.memberships.iter().find(|m| m.n == 1).unwrap().above_lower < 0.0);

        // The edge itself counts as inside.
        let report = base(2.3).classify_levels(2);
        assert_eq!(report.b.inside_channels(), vec![1]);
    }

    #[test]
    fn level_a_off_resonant_at_replica_edge_drive() {
        let report = base(2.3025).classify_levels(2);
        assert!(!report.a.is_inside_any());
        let report = base(2.2).classify_levels(2);
        assert_eq!(report.a.inside_channels(), vec![1]);
    }

    #[test]
    fn describe_mentions_side() {
        let report = base(2.3025).classify_levels(2);
        let text = report.b.describe();
        assert!(text.contains("below n=1 lower edge"), "{text}");
        let report = base(2.3).classify_levels(2);
        assert!(report.b.describe().starts_with("B inside n=1"));
    }

    proptest! {
        #[test]
        fn replica_ladder_spacing(
            e0 in -2.0f64..2.0, beta in 0.1f64..3.0, omega in 0.1f64..5.0, n in -20i32..20
        ) {
            let cfg = ModelConfig { e0, beta, omega, ..ModelConfig::replica_edge(1.0, 0.0) };
            let lo = replica_band(&cfg, n);
            let hi = replica_band(&cfg, n + 1);
            prop_assert!((lo.lower + omega - hi.lower).abs() < 1e-9);
            prop_assert!((lo.upper - lo.lower - 2.0 * beta).abs() < 1e-9);
        }

        #[test]
        fn zero_channel_is_static_band(e0 in -1.0f64..1.0, beta in 0.1f64..2.0, e in -4.0f64..4.0) {
            let cfg = ModelConfig { e0, beta, e_b: e, ..ModelConfig::replica_edge(2.0, 0.0) };
            let report = classify_levels(&cfg, 0);
            let static_inside = e >= e0 - beta && e <= e0 + beta;
            prop_assert_eq!(report.b.is_inside_any(), static_inside);
        }

        #[test]
        fn chi_roundtrip(alpha in 0.0f64..10.0, omega in 0.01f64..10.0) {
            let cfg = ModelConfig { alpha, omega, ..ModelConfig::replica_edge(1.0, 0.0) };
            let v = cfg.validate().unwrap();
            prop_assert!((v.chi() * omega - alpha).abs() <= 1e-12 * alpha.max(1e-300));
            prop_assert!((v.period() * omega - TAU).abs() < 1e-12);
        }
    }
}
