//! Bessel-weighted self-energy kernels of the two Floquet ladders.
//!
//! The driven ladder couples to continuum channel `nu` with weight `J_{n-nu}(chi)`;
//! the undriven ladder couples channel-diagonally. All kernels are assembled from
//! a [`ChannelGreens`] snapshot holding `zeta^(nu)(z)` for one `z`.

mod bessel;

pub use bessel::{bessel_j, bessel_j_sequence, closure_cutoff, BesselTable};

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice_greens::{self, GreensError, Sheet, SheetPolicy, DEFAULT_BRANCH_GUARD};
use crate::model::ModelConfig;

/// Bessel tail weight allowed beyond the inner cutoff.
pub const CLOSURE_TAIL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TruncationError {
    #[error("inner cutoff {nu_cutoff} is below the channel cutoff {channels}")]
    InnerBelowChannels { channels: usize, nu_cutoff: usize },
    #[error("Bessel tail weight {tail:e} beyond cutoff {nu_cutoff} exceeds {limit:e}")]
    TailTooHeavy { nu_cutoff: usize, tail: f64, limit: f64 },
}

/// Symmetric Floquet cutoffs: ladder channels `n in [-N, N]` and inner
/// continuum channels `nu in [-Nnu, Nnu]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloquetTruncation {
    #[serde(rename = "N")]
    pub channels: usize,
    #[serde(rename = "Nnu")]
    pub nu_cutoff: usize,
}

impl FloquetTruncation {
    /// `Nnu = N + K(chi)` where `K` is the Bessel closure cutoff, so every ladder
    /// row `|n| <= N` sees its full Bessel weight.
    pub fn auto(channels: usize, chi: f64) -> Self {
        FloquetTruncation { channels, nu_cutoff: channels + closure_cutoff(chi, CLOSURE_TAIL) }
    }

    pub fn validate(&self, chi: f64) -> Result<(), TruncationError> {
        if self.nu_cutoff < self.channels {
            return Err(TruncationError::InnerBelowChannels { channels: self.channels, nu_cutoff: self.nu_cutoff });
        }
        let table = BesselTable::new(chi, self.nu_cutoff + 60);
        let tail = table.tail_weight(self.nu_cutoff);
        if tail >= CLOSURE_TAIL {
            return Err(TruncationError::TailTooHeavy { nu_cutoff: self.nu_cutoff, tail, limit: CLOSURE_TAIL });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        2 * self.channels + 1
    }

    pub fn channel_range(&self) -> std::ops::RangeInclusive<i32> {
        let n = self.channels as i32;
        -n..=n
    }

    pub fn nu_range(&self) -> std::ops::RangeInclusive<i32> {
        let n = self.nu_cutoff as i32;
        -n..=n
    }

    /// Matrix row/column of channel `n`.
    pub fn index(&self, n: i32) -> usize {
        (n + self.channels as i32) as usize
    }
}

/// Which sheet each continuum channel was evaluated on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetMap {
    pub lowest: i32,
    pub highest: i32,
    /// Channels on the second sheet; all others are physical.
    pub second: Vec<i32>,
}

impl SheetMap {
    pub fn sheet(&self, nu: i32) -> Sheet {
        if self.second.contains(&nu) {
            Sheet::Second
        } else {
            Sheet::Physical
        }
    }
}

impl fmt::Display for SheetMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]", self.lowest, self.highest)?;
        if self.second.is_empty() {
            write!(f, " all physical")
        } else {
            let list: Vec<String> = self.second.iter().map(|n| n.to_string()).collect();
            write!(f, " second: {}", list.join(","))
        }
    }
}

/// Snapshot of `zeta^(nu)(z)` for `nu in [-L, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGreens {
    z: Complex64,
    cutoff: i32,
    values: Vec<Complex64>,
    sheets: Vec<Sheet>,
}

impl ChannelGreens {
    pub fn evaluate(
        z: Complex64,
        cutoff: usize,
        policy: SheetPolicy,
        config: &ModelConfig,
        guard: f64,
    ) -> Result<Self, GreensError> {
        let l = cutoff as i32;
        let sheets: Vec<Sheet> = (-l..=l).map(|nu| policy.sheet(nu, z, config)).collect();
        Self::with_sheets(z, cutoff, sheets, config, guard)
    }

    /// Evaluates on a prescribed sheet assignment (used to keep finite
    /// differences on one branch).
    pub fn evaluate_on(z: Complex64, map: &SheetMap, config: &ModelConfig, guard: f64) -> Result<Self, GreensError> {
        let cutoff = map.highest.max(-map.lowest) as usize;
        let l = cutoff as i32;
        let sheets = (-l..=l).map(|nu| map.sheet(nu)).collect();
        Self::with_sheets(z, cutoff, sheets, config, guard)
    }

    fn with_sheets(
        z: Complex64,
        cutoff: usize,
        sheets: Vec<Sheet>,
        config: &ModelConfig,
        guard: f64,
    ) -> Result<Self, GreensError> {
        let l = cutoff as i32;
        let values = (-l..=l)
            .zip(&sheets)
            .map(|(nu, &sheet)| lattice_greens::zeta0_guarded(z - f64::from(nu) * config.omega, sheet, config, guard))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChannelGreens { z, cutoff: l, values, sheets })
    }

    /// Every channel replaced by the constant `value`; a stand-in continuum for
    /// checking the kernel algebra.
    pub fn constant(z: Complex64, cutoff: usize, value: Complex64) -> Self {
        let n = 2 * cutoff + 1;
        ChannelGreens { z, cutoff: cutoff as i32, values: vec![value; n], sheets: vec![Sheet::Physical; n] }
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff as usize
    }

    /// `zeta^(nu)(z)`; panics outside the snapshot range.
    pub fn get(&self, nu: i32) -> Complex64 {
        assert!(nu.abs() <= self.cutoff, "channel {nu} outside snapshot range");
        self.values[(nu + self.cutoff) as usize]
    }

    pub fn sheet_map(&self) -> SheetMap {
        let second = (-self.cutoff..=self.cutoff)
            .zip(&self.sheets)
            .filter(|(_, &s)| s == Sheet::Second)
            .map(|(nu, _)| nu)
            .collect();
        SheetMap { lowest: -self.cutoff, highest: self.cutoff, second }
    }
}

/// Which of the four kernel blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelPair {
    AA,
    BB,
    AB,
    BA,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelBlock {
    pub pair: KernelPair,
    pub z: Complex64,
    pub matrix: DMatrix<Complex64>,
    pub sheetmap: SheetMap,
}

/// Kernel builder bound to one configuration and truncation.
#[derive(Debug, Clone)]
pub struct SelfEnergy {
    config: ModelConfig,
    truncation: FloquetTruncation,
    bessel: BesselTable,
    guard: f64,
}

impl SelfEnergy {
    pub fn new(config: &ModelConfig, chi: f64, truncation: FloquetTruncation) -> Self {
        // `n - nu` reaches N + Nnu.
        let bessel = BesselTable::new(chi, truncation.channels + truncation.nu_cutoff);
        SelfEnergy { config: *config, truncation, bessel, guard: DEFAULT_BRANCH_GUARD }
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard;
        self
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn truncation(&self) -> FloquetTruncation {
        self.truncation
    }

    pub fn bessel(&self) -> &BesselTable {
        &self.bessel
    }

    pub fn greens(&self, z: Complex64, policy: SheetPolicy) -> Result<ChannelGreens, GreensError> {
        ChannelGreens::evaluate(z, self.truncation.nu_cutoff, policy, &self.config, self.guard)
    }

    pub fn greens_on(&self, z: Complex64, map: &SheetMap) -> Result<ChannelGreens, GreensError> {
        ChannelGreens::evaluate_on(z, map, &self.config, self.guard)
    }

    /// `xi_AA^(n,n')(z) = sum_nu J_{n-nu} J_{n'-nu} zeta^(nu)(z)`.
    pub fn xi_aa(&self, greens: &ChannelGreens, n: i32, n2: i32) -> Complex64 {
        self.truncation.nu_range().map(|nu| greens.get(nu) * (self.bessel.get(n - nu) * self.bessel.get(n2 - nu))).sum()
    }

    /// Diagonal `xi_AA^(n)(z) = sum_nu J_{n-nu}^2 zeta^(nu)(z)`.
    pub fn xi_aa_diag(&self, greens: &ChannelGreens, n: i32) -> Complex64 {
        self.xi_aa(greens, n, n)
    }

    pub fn xi_bb(&self, greens: &ChannelGreens, n: i32, n2: i32) -> Complex64 {
        if n == n2 {
            greens.get(n)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `xi_AB^(n,n')(z) = J_{n-n'} zeta^(n')(z)`.
    pub fn xi_ab(&self, greens: &ChannelGreens, n: i32, n2: i32) -> Complex64 {
        greens.get(n2) * self.bessel.get(n - n2)
    }

    /// `xi_BA^(n,n')(z) = J_{n'-n} zeta^(n)(z)`.
    pub fn xi_ba(&self, greens: &ChannelGreens, n: i32, n2: i32) -> Complex64 {
        greens.get(n) * self.bessel.get(n2 - n)
    }

    pub fn entry(&self, pair: KernelPair, greens: &ChannelGreens, n: i32, n2: i32) -> Complex64 {
        match pair {
            KernelPair::AA => self.xi_aa(greens, n, n2),
            KernelPair::BB => self.xi_bb(greens, n, n2),
            KernelPair::AB => self.xi_ab(greens, n, n2),
            KernelPair::BA => self.xi_ba(greens, n, n2),
        }
    }

    /// Dense `(2N+1)^2` block for `pair` from an existing snapshot.
    pub fn block_from(&self, pair: KernelPair, greens: &ChannelGreens) -> DMatrix<Complex64> {
        let t = self.truncation;
        let n0 = t.channels as i32;
        DMatrix::from_fn(t.dim(), t.dim(), |i, j| self.entry(pair, greens, i as i32 - n0, j as i32 - n0))
    }

    pub fn kernel_block(
        &self,
        pair: KernelPair,
        z: Complex64,
        policy: SheetPolicy,
    ) -> Result<KernelBlock, GreensError> {
        let greens = self.greens(z, policy)?;
        Ok(KernelBlock { pair, z, matrix: self.block_from(pair, &greens), sheetmap: greens.sheet_map() })
    }
}
