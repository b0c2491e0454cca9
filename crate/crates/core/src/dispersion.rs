//! Dispersion functions for the complex quasienergies and the root finder
//! that turns them into [`Pole`]s.
//!
//! Five variants are available:
//!
//! * `DeterminantA` / `DeterminantB`: determinant of the full ladder matrix
//!   with the other ladder eliminated through its inverse propagator.
//! * `ScalarA0`: channel-diagonal driven ladder, rung `n = 0`.
//! * `ScalarB0Exact`: undriven level projected on its physical component with
//!   the channel-diagonal driven ladder resummed.
//! * `ScalarB0Expanded`: the same function expanded through `gA^4 gB^2`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice_greens::{GreensError, SheetPolicy};
use crate::model::{Level, ValidatedConfig};
use crate::selfenergy::{ChannelGreens, FloquetTruncation, KernelPair, SelfEnergy, SheetMap};

/// Distance to a bare or dressed ladder pole treated as singular.
pub const DEFAULT_LADDER_GUARD: f64 = 1e-10;
/// Condition number beyond which the eliminated ladder is considered singular.
pub const MAX_CONDITION: f64 = 1e14;
/// Highest channel cutoff tried by [`converge_truncation`].
pub const MAX_TRUNCATION: usize = 25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Greens(#[from] GreensError),
    #[error("ladder propagator of level {level} is singular at z = {z} (condition {condition:e})")]
    SingularGYMatrix { level: Level, z: Complex64, condition: f64 },
    #[error("driven-ladder rung n={n} vanishes at z = {z}")]
    SingularDeltaA { n: i32, z: Complex64 },
    #[error("z = {z} is within the guard of bare ladder pole n={n}")]
    LadderPoleProximity { n: i32, z: Complex64 },
    #[error("no convergence after {iterations} iterations (last z = {z}, residual {residual:e})")]
    NoConvergence { iterations: usize, z: Complex64, residual: f64, trace: Vec<Complex64> },
    #[error("sheet assignment oscillates near z = {z}: {trace:?}")]
    SheetFlipLivelock { z: Complex64, trace: Vec<String> },
    #[error("root z = {0} lies in the upper half-plane")]
    UpperHalfPlane(Complex64),
    #[error("pole did not settle for any channel cutoff up to {max}")]
    NoTruncationConvergence { max: usize, last_change: f64 },
}

impl SolverError {
    /// Iterate history when the error came from a stalled root search.
    pub fn trace(&self) -> Option<&[Complex64]> {
        match self {
            SolverError::NoConvergence { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DispersionVariant {
    DeterminantA,
    DeterminantB,
    ScalarA0,
    ScalarB0Exact,
    ScalarB0Expanded,
}

impl DispersionVariant {
    pub const ALL: [DispersionVariant; 5] = [
        DispersionVariant::DeterminantA,
        DispersionVariant::DeterminantB,
        DispersionVariant::ScalarA0,
        DispersionVariant::ScalarB0Exact,
        DispersionVariant::ScalarB0Expanded,
    ];

    /// The level whose pole this variant locates.
    pub fn level(self) -> Level {
        match self {
            DispersionVariant::DeterminantA | DispersionVariant::ScalarA0 => Level::A,
            _ => Level::B,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DispersionVariant::DeterminantA => "determinant-a",
            DispersionVariant::DeterminantB => "determinant-b",
            DispersionVariant::ScalarA0 => "scalar-a0",
            DispersionVariant::ScalarB0Exact => "scalar-b0-exact",
            DispersionVariant::ScalarB0Expanded => "scalar-b0-expanded",
        }
    }
}

impl fmt::Display for DispersionVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DispersionVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_lowercase();
        match key.as_str() {
            "determinanta" | "deta" => Ok(DispersionVariant::DeterminantA),
            "determinantb" | "detb" => Ok(DispersionVariant::DeterminantB),
            "scalara0" => Ok(DispersionVariant::ScalarA0),
            "scalarb0exact" | "scalarb0" => Ok(DispersionVariant::ScalarB0Exact),
            "scalarb0expanded" => Ok(DispersionVariant::ScalarB0Expanded),
            _ => Err(format!("unknown dispersion variant '{s}'")),
        }
    }
}

/// A complex quasienergy `z = e - i gamma` with the provenance of its solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub z: Complex64,
    pub gamma: f64,
    pub variant: DispersionVariant,
    pub truncation: FloquetTruncation,
    pub sheetmap: SheetMap,
    pub residual: f64,
    pub iterations: usize,
}

impl Pole {
    pub fn energy(&self) -> f64 {
        self.z.re
    }
}

/// Root-finder settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Residual tolerance on `|eta(z)|`.
    pub tol: f64,
    /// Step tolerance on `|dz|`.
    pub step_tol: f64,
    pub max_iter: usize,
    /// Guard for ladder denominators.
    pub guard: f64,
    /// Guard for the band-edge branch points.
    pub branch_guard: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            step_tol: 1e-12,
            max_iter: 200,
            guard: DEFAULT_LADDER_GUARD,
            branch_guard: crate::lattice_greens::DEFAULT_BRANCH_GUARD,
        }
    }
}

/// Dispersion functions for one configuration and truncation.
#[derive(Debug, Clone)]
pub struct Dispersion {
    config: ValidatedConfig,
    kernels: SelfEnergy,
    guard: f64,
}

impl Dispersion {
    pub fn new(config: &ValidatedConfig, truncation: FloquetTruncation) -> Self {
        Self::with_options(config, truncation, &SolverOptions::default())
    }

    pub fn with_options(config: &ValidatedConfig, truncation: FloquetTruncation, options: &SolverOptions) -> Self {
        let kernels = SelfEnergy::new(config, config.chi(), truncation).with_guard(options.branch_guard);
        Dispersion { config: *config, kernels, guard: options.guard }
    }

    pub fn config(&self) -> &ValidatedConfig {
        &self.config
    }

    pub fn kernels(&self) -> &SelfEnergy {
        &self.kernels
    }

    pub fn truncation(&self) -> FloquetTruncation {
        self.kernels.truncation()
    }

    pub fn greens(&self, z: Complex64) -> Result<ChannelGreens, GreensError> {
        self.kernels.greens(z, SheetPolicy::PoleSearch)
    }

    /// `Delta_A^(n)(z) = z - eA - n omega - gA^2 xi_AA^(n)(z)`.
    pub fn delta_a(&self, greens: &ChannelGreens, n: i32) -> Complex64 {
        let cfg = &self.config;
        greens.z() - cfg.e_a - f64::from(n) * cfg.omega - cfg.g_a * cfg.g_a * self.kernels.xi_aa_diag(greens, n)
    }

    /// Full ladder inverse propagator `Delta_X^(n,n')(z)`.
    pub fn delta_matrix(&self, level: Level, greens: &ChannelGreens) -> DMatrix<Complex64> {
        let cfg = &self.config;
        let g2 = cfg.coupling(level).powi(2);
        let pair = match level {
            Level::A => KernelPair::AA,
            Level::B => KernelPair::BB,
        };
        let mut m = self.kernels.block_from(pair, greens) * Complex64::new(-g2, 0.0);
        let t = self.truncation();
        for n in t.channel_range() {
            let i = t.index(n);
            m[(i, i)] += greens.z() - cfg.level_energy(level) - f64::from(n) * cfg.omega;
        }
        m
    }

    /// `eta_X^(n,n')(z)`: the level-`X` ladder with the other ladder eliminated.
    pub fn eta_matrix_on(&self, level: Level, greens: &ChannelGreens) -> Result<DMatrix<Complex64>, SolverError> {
        let cfg = &self.config;
        let mut eta = self.delta_matrix(level, greens);
        let other = level.other();
        let cross = (cfg.coupling(level) * cfg.coupling(other)).powi(2);
        if cross == 0.0 {
            return Ok(eta);
        }
        let delta_other = self.delta_matrix(other, greens);
        let inverse = checked_inverse(&delta_other).map_err(|condition| SolverError::SingularGYMatrix {
            level: other,
            z: greens.z(),
            condition,
        })?;
        let (to, from) = match level {
            Level::A => (KernelPair::AB, KernelPair::BA),
            Level::B => (KernelPair::BA, KernelPair::AB),
        };
        let xi_to = self.kernels.block_from(to, greens);
        let xi_from = self.kernels.block_from(from, greens);
        eta -= (xi_to * inverse * xi_from) * Complex64::new(cross, 0.0);
        Ok(eta)
    }

    pub fn eta_matrix(&self, level: Level, z: Complex64) -> Result<DMatrix<Complex64>, SolverError> {
        self.eta_matrix_on(level, &self.greens(z)?)
    }

    /// `det eta_X(z)` divided by `prod_{n != 0} (z - e_X - n omega)`.
    ///
    /// Leaving the `n = 0` factor in keeps the level-`X` root free of a
    /// compensating pole; at zero coupling the result is exactly `z - e_X`.
    pub fn eta_det_on(&self, level: Level, greens: &ChannelGreens) -> Result<Complex64, SolverError> {
        let cfg = &self.config;
        let eta = self.eta_matrix_on(level, greens)?;
        let det = eta.lu().determinant();
        let e = cfg.level_energy(level);
        let mut norm = Complex64::new(1.0, 0.0);
        for n in self.truncation().channel_range().filter(|&n| n != 0) {
            let free = greens.z() - e - f64::from(n) * cfg.omega;
            if free.norm() < self.guard {
                return Err(SolverError::LadderPoleProximity { n, z: greens.z() });
            }
            norm *= free;
        }
        Ok(det / norm)
    }

    pub fn eta_det(&self, level: Level, z: Complex64) -> Result<Complex64, SolverError> {
        self.eta_det_on(level, &self.greens(z)?)
    }

    /// `z - eA - gA^2 sum_nu J_nu^2 zeta^(nu)(z)`.
    pub fn eta_tilde_a0_on(&self, greens: &ChannelGreens) -> Complex64 {
        self.delta_a(greens, 0)
    }

    pub fn eta_tilde_a0(&self, z: Complex64) -> Result<Complex64, SolverError> {
        Ok(self.eta_tilde_a0_on(&self.greens(z)?))
    }

    /// `z - eB - gB^2 zeta0 - gA^2 gB^2 zeta0^2 sum_n J_n^2 / Delta_A^(n)`.
    pub fn eta_tilde_b0_exact_on(&self, greens: &ChannelGreens) -> Result<Complex64, SolverError> {
        let cfg = &self.config;
        let z = greens.z();
        let zeta0 = greens.get(0);
        let ga2 = cfg.g_a * cfg.g_a;
        let gb2 = cfg.g_b * cfg.g_b;
        let mut ladder = Complex64::new(0.0, 0.0);
        if ga2 * gb2 != 0.0 {
            for n in self.truncation().channel_range() {
                let delta = self.delta_a(greens, n);
                if delta.norm() < self.guard {
                    return Err(SolverError::SingularDeltaA { n, z });
                }
                ladder += self.kernels.bessel().squared(n) / delta;
            }
        }
        Ok(z - cfg.e_b - gb2 * zeta0 - ga2 * gb2 * zeta0 * zeta0 * ladder)
    }

    pub fn eta_tilde_b0_exact(&self, z: Complex64) -> Result<Complex64, SolverError> {
        self.eta_tilde_b0_exact_on(&self.greens(z)?)
    }

    /// The three contributions to the expanded B function beyond `z - eB`:
    /// `[gB^2 zeta0, gA^2 gB^2 term, gA^4 gB^2 term]`, each as subtracted.
    pub fn b0_expansion_terms(&self, greens: &ChannelGreens) -> Result<[Complex64; 3], SolverError> {
        let cfg = &self.config;
        let z = greens.z();
        let zeta0 = greens.get(0);
        let ga2 = cfg.g_a * cfg.g_a;
        let gb2 = cfg.g_b * cfg.g_b;
        let bessel = self.kernels.bessel();
        let t = self.truncation();
        let mut first = Complex64::new(0.0, 0.0);
        let mut second = Complex64::new(0.0, 0.0);
        for n in t.channel_range() {
            let bare = z - cfg.e_a - f64::from(n) * cfg.omega;
            if bare.norm() < self.guard {
                return Err(SolverError::LadderPoleProximity { n, z });
            }
            let w = bessel.squared(n);
            first += w / bare;
            let inner: Complex64 = t.nu_range().map(|nu| greens.get(nu) * bessel.squared(n - nu)).sum();
            second += w * inner / (bare * bare);
        }
        Ok([gb2 * zeta0, ga2 * gb2 * zeta0 * zeta0 * first, ga2 * ga2 * gb2 * zeta0 * zeta0 * second])
    }

    pub fn eta_tilde_b0_expanded_on(&self, greens: &ChannelGreens) -> Result<Complex64, SolverError> {
        let [t0, t1, t2] = self.b0_expansion_terms(greens)?;
        Ok(greens.z() - self.config.e_b - t0 - t1 - t2)
    }

    pub fn eta_tilde_b0_expanded(&self, z: Complex64) -> Result<Complex64, SolverError> {
        self.eta_tilde_b0_expanded_on(&self.greens(z)?)
    }

    /// The dispersion function of `variant` on a given Green's-function snapshot.
    pub fn evaluate_on(&self, variant: DispersionVariant, greens: &ChannelGreens) -> Result<Complex64, SolverError> {
        match variant {
            DispersionVariant::DeterminantA => self.eta_det_on(Level::A, greens),
            DispersionVariant::DeterminantB => self.eta_det_on(Level::B, greens),
            DispersionVariant::ScalarA0 => Ok(self.eta_tilde_a0_on(greens)),
            DispersionVariant::ScalarB0Exact => self.eta_tilde_b0_exact_on(greens),
            DispersionVariant::ScalarB0Expanded => self.eta_tilde_b0_expanded_on(greens),
        }
    }

    /// Evaluates with the pole-search sheet rule applied at `z`.
    pub fn evaluate(&self, variant: DispersionVariant, z: Complex64) -> Result<Complex64, SolverError> {
        self.evaluate_on(variant, &self.greens(z)?)
    }

    fn evaluate_with_map(
        &self,
        variant: DispersionVariant,
        z: Complex64,
        map: &SheetMap,
    ) -> Result<Complex64, SolverError> {
        self.evaluate_on(variant, &self.kernels.greens_on(z, map)?)
    }

    /// Default seed: the bare energy of the variant's level.
    pub fn default_seed(&self, variant: DispersionVariant) -> Complex64 {
        Complex64::new(self.config.level_energy(variant.level()), 0.0)
    }

    /// Complex root of `variant` near `seed`.
    ///
    /// Damped Newton with a central-difference derivative taken on the sheet
    /// assignment of the current iterate; falls back to Muller's method when
    /// damping stops reducing the residual.
    pub fn find_pole(
        &self,
        variant: DispersionVariant,
        seed: Complex64,
        options: &SolverOptions,
    ) -> Result<Pole, SolverError> {
        let mut z = seed;
        let mut trace = Vec::new();
        let mut maps: Vec<SheetMap> = Vec::new();
        let mut muller: Option<[(Complex64, Complex64); 3]> = None;
        let mut residual = f64::INFINITY;

        let mut nudges = 0;
        for iteration in 1..=options.max_iter {
            // An iterate exactly on a band edge (e.g. a seed at the replica
            // edge) is moved off it along the real axis.
            let greens = loop {
                match self.greens(z) {
                    Ok(g) => break g,
                    Err(GreensError::BranchPoint(_)) if nudges < MAX_NUDGES => {
                        nudges += 1;
                        z += BRANCH_NUDGE;
                    }
                    Err(e) => return Err(e.into()),
                }
            };
            trace.push(z);
            let map = greens.sheet_map();
            check_livelock(&mut maps, &map, z)?;
            let f = self.evaluate_on(variant, &greens)?;
            residual = f.norm();

            let step = match muller.as_mut() {
                None => {
                    let h = 1e-7 * z.norm().max(1.0);
                    let plus = self.evaluate_with_map(variant, z + h, &map)?;
                    let minus = self.evaluate_with_map(variant, z - h, &map)?;
                    let derivative = (plus - minus) / (2.0 * h);
                    -f / derivative
                }
                Some(points) => {
                    points.rotate_left(1);
                    points[2] = (z, f);
                    muller_step(points)
                }
            };
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            if residual < options.tol && step.norm() < options.step_tol {
                return self.finish(variant, z, map, residual, iteration);
            }

            if muller.is_some() {
                z += step;
                continue;
            }
            // Damped Newton: halve until the residual drops.
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..30 {
                let candidate = z + step * lambda;
                if let Ok(value) = self.evaluate(variant, candidate) {
                    if value.norm() < residual || (step * lambda).norm() < options.step_tol {
                        accepted = Some(candidate);
                        break;
                    }
                }
                lambda *= 0.5;
            }
            match accepted {
                Some(next) => z = next,
                None => {
                    // Stagnation: seed Muller with three nearby points.
                    let spread = step.norm().max(1e-8);
                    let a = z - spread;
                    let b = z + Complex64::new(0.0, spread);
                    muller = Some([(a, self.evaluate(variant, a)?), (b, self.evaluate(variant, b)?), (z, f)]);
                    z += muller_step(muller.as_ref().unwrap());
                }
            }
        }
        Err(SolverError::NoConvergence { iterations: options.max_iter, z, residual, trace })
    }

    fn finish(
        &self,
        variant: DispersionVariant,
        z: Complex64,
        sheetmap: SheetMap,
        residual: f64,
        iterations: usize,
    ) -> Result<Pole, SolverError> {
        if z.im > 1e-12 {
            return Err(SolverError::UpperHalfPlane(z));
        }
        Ok(Pole {
            z,
            gamma: if z.im == 0.0 { 0.0 } else { -z.im },
            variant,
            truncation: self.truncation(),
            sheetmap,
            residual,
            iterations,
        })
    }
}

/// Inverse with a 1-norm condition estimate; the error carries the condition.
fn checked_inverse(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, f64> {
    let inverse = m.clone().lu().try_inverse().ok_or(f64::INFINITY)?;
    let condition = norm1(m) * norm1(&inverse);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(condition);
    }
    Ok(inverse)
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter().map(|col| col.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn muller_step(points: &[(Complex64, Complex64); 3]) -> Complex64 {
    let [(x0, f0), (x1, f1), (x2, f2)] = *points;
    let h1 = x1 - x0;
    let h2 = x2 - x1;
    if h1.norm() == 0.0 || h2.norm() == 0.0 || (h1 + h2).norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let d1 = (f1 - f0) / h1;
    let d2 = (f2 - f1) / h2;
    let a = (d2 - d1) / (h2 + h1);
    let b = a * h2 + d2;
    let disc = (b * b - 4.0 * f2 * a).sqrt();
    let denom = if (b + disc).norm() > (b - disc).norm() { b + disc } else { b - disc };
    let step = -2.0 * f2 / denom;
    if step.re.is_finite() && step.im.is_finite() {
        step
    } else {
        Complex64::new(0.0, 0.0)
    }
}

const LIVELOCK_WINDOW: usize = 6;
const BRANCH_NUDGE: f64 = 1e-9;
const MAX_NUDGES: usize = 4;

fn check_livelock(history: &mut Vec<SheetMap>, map: &SheetMap, z: Complex64) -> Result<(), SolverError> {
    history.push(map.clone());
    let n = history.len();
    if n < LIVELOCK_WINDOW {
        return Ok(());
    }
    let window = &history[n - LIVELOCK_WINDOW..];
    let alternating = window.windows(2).all(|w| w[0] != w[1]) && window.windows(3).all(|w| w[0] == w[2]);
    if alternating {
        return Err(SolverError::SheetFlipLivelock { z, trace: window.iter().map(|m| m.to_string()).collect() });
    }
    Ok(())
}

/// Validates `config` and finds the pole of `variant` at a fixed truncation.
pub fn find_pole(
    variant: DispersionVariant,
    seed: Option<Complex64>,
    config: &ValidatedConfig,
    truncation: FloquetTruncation,
    options: &SolverOptions,
) -> Result<Pole, SolverError> {
    let dispersion = Dispersion::with_options(config, truncation, options);
    let seed = seed.unwrap_or_else(|| dispersion.default_seed(variant));
    dispersion.find_pole(variant, seed, options)
}

/// Raises the channel cutoff until successive poles agree to `tol` and
/// returns the first cutoff that did.
pub fn converge_truncation(
    variant: DispersionVariant,
    seed: Option<Complex64>,
    config: &ValidatedConfig,
    tol: f64,
    options: &SolverOptions,
) -> Result<(FloquetTruncation, Pole), SolverError> {
    let mut previous: Option<Pole> = None;
    let mut last_change = f64::INFINITY;
    for channels in 0..=MAX_TRUNCATION {
        let truncation = FloquetTruncation::auto(channels, config.chi());
        let pole = find_pole(variant, seed, config, truncation, options)?;
        if let Some(prev) = previous {
            last_change = (pole.z - prev.z).norm();
            if last_change < tol {
                return Ok((prev.truncation, prev));
            }
        }
        previous = Some(pole);
    }
    Err(SolverError::NoTruncationConvergence { max: MAX_TRUNCATION, last_change })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;
    use crate::selfenergy::bessel_j;

    const CHI: f64 = 1.081978;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn setup(omega: f64, chi: f64, channels: usize) -> Dispersion {
        let cfg = ModelConfig::replica_edge(omega, chi).validate().unwrap();
        Dispersion::new(&cfg, FloquetTruncation::auto(channels, chi))
    }

    fn uncoupled(omega: f64) -> Dispersion {
        let cfg = ModelConfig::replica_edge(omega, CHI).with_couplings(0.0, 0.0).validate().unwrap();
        Dispersion::new(&cfg, FloquetTruncation::auto(3, CHI))
    }

    #[test]
    fn delta_a_free_limit() {
        let d = uncoupled(2.3025);
        let z = c(0.4, -0.1);
        let g = d.greens(z).unwrap();
        for n in -3..=3 {
            assert_eq!(d.delta_a(&g, n), z - 1.25 - f64::from(n) * 2.3025);
        }
    }

    #[test]
    fn delta_a_real_outside_bands() {
        let d = setup(2.3025, CHI, 3);
        let g = d.greens(c(1.25, 0.0)).unwrap();
        let value = d.delta_a(&g, 0);
        assert_eq!(value.im, 0.0);
        let expected = -0.05f64.powi(2) * d.kernels().xi_aa_diag(&g, 0).re;
        assert!((value.re - expected).abs() < 1e-15);
    }

    #[test]
    fn delta_a_shift_identity() {
        // With undriven weights the rung index only shifts the argument.
        let d = setup(2.3025, 0.0, 3);
        let z = c(2.9, 0.3);
        let g = d.greens(z).unwrap();
        let g_shift = d.greens(z - 2.3025).unwrap();
        assert!((d.delta_a(&g, 1) - d.delta_a(&g_shift, 0)).norm() < 1e-14);
    }

    #[test]
    fn eta_matrix_limits() {
        let d = uncoupled(2.3025);
        let z = c(1.1, 0.0);
        let m = d.eta_matrix(Level::B, z).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let expected = if i == j { z - 1.30 - (i as f64 - 3.0) * 2.3025 } else { c(0.0, 0.0) };
                assert!((m[(i, j)] - expected).norm() < 1e-15);
            }
        }
        // With gA = 0 only the direct B self-energy survives.
        let cfg = ModelConfig::replica_edge(2.3025, CHI).with_couplings(0.0, 0.05).validate().unwrap();
        let d = Dispersion::new(&cfg, FloquetTruncation::auto(2, CHI));
        let g = d.greens(z).unwrap();
        let m = d.eta_matrix_on(Level::B, &g).unwrap();
        assert_eq!(m, d.delta_matrix(Level::B, &g));
    }

    #[test]
    fn eta_det_normalization() {
        let d = uncoupled(2.3025);
        let z = c(0.77, 0.0);
        let value = d.eta_det(Level::B, z).unwrap();
        assert!((value - (z - 1.30)).norm() < 1e-14);
        let value = d.eta_det(Level::A, z).unwrap();
        assert!((value - (z - 1.25)).norm() < 1e-14);
    }

    #[test]
    fn eta_det_smooth_off_cut() {
        let d = setup(2.3025, CHI, 2);
        let center = c(0.3, 0.4);
        let h = 1e-4;
        let f = |z| d.eta_det(Level::B, z).unwrap();
        let deriv = (f(center + h) - f(center - h)) / (2.0 * h);
        let deriv2 = (f(center + 2.0 * h) - f(center - 2.0 * h)) / (4.0 * h);
        assert!((deriv - deriv2).norm() < 1e-6);
    }

    #[test]
    fn eta_tilde_a0_limits() {
        let d = uncoupled(2.3025);
        assert_eq!(d.eta_tilde_a0(c(0.2, 0.1)).unwrap(), c(0.2, 0.1) - 1.25);
        let d = setup(2.3025, 0.0, 2);
        let z = c(1.4, 0.0);
        let g = d.greens(z).unwrap();
        let expected = z - 1.25 - 0.0025 * g.get(0);
        assert!((d.eta_tilde_a0(z).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn scalar_b_forms_agree_without_driven_coupling() {
        let cfg = ModelConfig::replica_edge(2.3025, CHI).with_couplings(0.0, 0.05).validate().unwrap();
        let d = Dispersion::new(&cfg, FloquetTruncation::auto(2, CHI));
        let z = c(1.31, -0.01);
        let g = d.greens(z).unwrap();
        let exact = d.eta_tilde_b0_exact(z).unwrap();
        assert!((exact - (z - 1.30 - 0.0025 * g.get(0))).norm() < 1e-15);
        assert_eq!(exact, d.eta_tilde_b0_expanded(z).unwrap());
    }

    #[test]
    fn expansion_imaginary_part_comes_from_last_term() {
        let d = setup(2.3025, CHI, 3);
        let z = c(1.30308, 0.0);
        let g = d.greens(z).unwrap();
        let [t0, t1, t2] = d.b0_expansion_terms(&g).unwrap();
        assert_eq!(t0.im, 0.0);
        assert_eq!(t1.im, 0.0);
        assert!(t2.im.abs() > 1e-7);
        // Isolate the nu = 1 channel inside the last term.
        let b = d.kernels().bessel();
        let zeta0 = g.get(0);
        let mut only_nu1 = c(0.0, 0.0);
        for n in -3..=3 {
            let bare = z - 1.25 - f64::from(n) * 2.3025;
            only_nu1 += b.squared(n) * b.squared(n - 1) * g.get(1) / (bare * bare);
        }
        let only_nu1 = 0.05f64.powi(6) * zeta0 * zeta0 * only_nu1;
        assert!((only_nu1.im - t2.im).abs() < 1e-12 * t2.im.abs().max(1e-30) + 1e-18);
    }

    #[test]
    fn ladder_pole_guard() {
        let d = setup(2.3025, CHI, 2);
        assert!(matches!(d.eta_tilde_b0_expanded(c(1.25, 0.0)), Err(SolverError::LadderPoleProximity { n: 0, .. })));
    }

    #[test]
    fn uncoupled_poles_sit_on_bare_levels() {
        let d = uncoupled(2.3025);
        for variant in DispersionVariant::ALL {
            let seed = d.default_seed(variant);
            let pole = d.find_pole(variant, seed, &SolverOptions::default()).unwrap();
            assert_eq!(pole.z, seed, "{variant}");
            assert_eq!(pole.iterations, 1);
            assert_eq!(pole.gamma, 0.0);
        }
    }

    #[test]
    fn replica_edge_poles() {
        let opts = SolverOptions::default();
        // At omega = 2.3 the bare seed sits exactly on the n = 1 branch point.
        for (omega, gamma) in [(2.3000, 1.2133e-5), (2.3010, 1.4645e-5), (2.3020, 1.9906e-5), (2.3025, 2.6346e-5)] {
            let d = setup(omega, CHI, 4);
            let pole = d.find_pole(DispersionVariant::ScalarB0Exact, c(1.30, 0.0), &opts).unwrap();
            assert!((pole.gamma / gamma - 1.0).abs() < 1e-3, "omega={omega} gamma={}", pole.gamma);
            assert!(pole.residual < opts.tol);
            assert_eq!(pole.sheetmap.second, vec![1]);
        }
        let d = setup(2.3040, CHI, 4);
        let pole = d.find_pole(DispersionVariant::ScalarB0Exact, c(1.30, 0.0), &opts).unwrap();
        assert!(pole.gamma.abs() < 1e-9);
        assert!(pole.sheetmap.second.is_empty());
    }

    #[test]
    fn driven_level_pole_in_switching_regime() {
        // omega = 2.2 places eA inside the n = 1 replica; leading-order width
        // gA^2 J1^2 / sqrt(beta^2 - (eA - omega)^2).
        let chi = 2.404826;
        let d = setup(2.2, chi, 4);
        let pole = d.find_pole(DispersionVariant::ScalarA0, c(1.25, 0.0), &SolverOptions::default()).unwrap();
        let estimate = 0.0025 * bessel_j(1, chi).powi(2) / (1.0f64 - 0.95 * 0.95).sqrt();
        assert!((pole.gamma / estimate - 1.0).abs() < 0.05, "{} vs {estimate}", pole.gamma);
        assert!(pole.gamma > 2e-3 && pole.gamma < 2.3e-3);
    }

    #[test]
    fn truncation_convergence() {
        let cfg = ModelConfig::replica_edge(2.3025, CHI).validate().unwrap();
        let opts = SolverOptions::default();
        let (t, pole) = converge_truncation(DispersionVariant::ScalarB0Exact, None, &cfg, 1e-10, &opts).unwrap();
        assert!(t.channels <= 5, "N = {}", t.channels);
        let doubled = find_pole(
            DispersionVariant::ScalarB0Exact,
            None,
            &cfg,
            FloquetTruncation::auto(2 * t.channels + 2, CHI),
            &opts,
        )
        .unwrap();
        assert!((doubled.gamma - pole.gamma).abs() < 1e-12);

        let undriven = ModelConfig::replica_edge(2.3025, 0.0).validate().unwrap();
        let (t, _) = converge_truncation(DispersionVariant::ScalarB0Exact, None, &undriven, 1e-10, &opts).unwrap();
        assert_eq!(t.channels, 0);
    }

    #[test]
    fn no_convergence_reports_trace() {
        let d = setup(2.3025, CHI, 2);
        let opts = SolverOptions { max_iter: 1, ..Default::default() };
        let err = d.find_pole(DispersionVariant::ScalarB0Exact, c(1.2, 0.0), &opts).unwrap_err();
        assert!(matches!(err, SolverError::NoConvergence { .. }));
        assert_eq!(err.trace().unwrap().len(), 1);
    }

    #[test]
    fn livelock_detection() {
        let a = SheetMap { lowest: -1, highest: 1, second: vec![] };
        let b = SheetMap { lowest: -1, highest: 1, second: vec![1] };
        let mut history = Vec::new();
        let z = c(0.0, 0.0);
        for i in 0..5 {
            let map = if i % 2 == 0 { &a } else { &b };
            check_livelock(&mut history, map, z).unwrap();
        }
        assert!(matches!(check_livelock(&mut history, &b, z), Err(SolverError::SheetFlipLivelock { .. })));
    }

    #[test]
    fn muller_finds_quadratic_root() {
        let f = |z: Complex64| z * z + 1.0;
        let mut pts = [c(0.1, 0.5), c(0.2, 0.8), c(-0.1, 1.2)].map(|z| (z, f(z)));
        let mut z = pts[2].0;
        for _ in 0..20 {
            z += muller_step(&pts);
            pts.rotate_left(1);
            pts[2] = (z, f(z));
        }
        assert!((z - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn variant_names_roundtrip() {
        for v in DispersionVariant::ALL {
            assert_eq!(v.name().parse::<DispersionVariant>().unwrap(), v);
        }
        assert_eq!("ScalarB0Exact".parse::<DispersionVariant>().unwrap(), DispersionVariant::ScalarB0Exact);
        assert!("bogus".parse::<DispersionVariant>().is_err());
    }
}
