//! Direct integration of the single-excitation Schrödinger equation on a
//! finite chain with a complex absorbing potential (CAP) near both ends.
//!
//! The state is `[dA, dB, c_{-M}, ..., c_M]`. Level A couples to site 0 with
//! `gA` and has energy `eA + alpha cos(omega t)`; level B couples to site 0
//! with `gB`. Sites beyond `|m| = M` are hard walls.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Level, ModelConfig, ValidatedConfig};

/// Upper bound on stored uniform samples when the stride is chosen automatically.
pub const MAX_AUTO_SAMPLES: usize = 200_000;
/// `dt` times the spectral bound above which RK4 is likely to blow up.
pub const STABILITY_LIMIT: f64 = 2.5;
/// Amplitude below which a site at the edge of the active window is left out.
const NEGLIGIBLE: f64 = 1e-250;
const WINDOW_PAD: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("chain half-length M must be positive")]
    EmptyChain,
    #[error("CAP width w = {w} must be smaller than M = {m}")]
    CapTooWide { w: usize, m: usize },
    #[error("CAP strength gamma0 must be finite and non-negative (got {0})")]
    CapStrength(f64),
    #[error("CAP exponent p must be positive (got {0})")]
    CapExponent(f64),
    #[error("time step dt must be positive (got {0})")]
    NonPositiveStep(f64),
    #[error("t_max = {t_max} is shorter than one step dt = {dt}")]
    TooShort { t_max: f64, dt: f64 },
    #[error("sample stride must be at least 1")]
    ZeroStride,
    #[error("state became non-finite; last good sample at t = {last_good}")]
    NonFiniteState { last_good: f64 },
}

/// Named integration profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionPreset {
    /// M = 1500, w = 900, dt = 2e-3.
    Desk,
    /// M = 5000, w = 3000, dt = 1e-3.
    Paper,
}

impl std::str::FromStr for EvolutionPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Ok(EvolutionPreset::Desk),
            "paper" => Ok(EvolutionPreset::Paper),
            _ => Err(format!("unknown evolution preset '{s}' (expected desk or paper)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// Sites run over `m = -M..=M`.
    #[serde(rename = "M")]
    pub half_length: usize,
    /// Width of the absorbing edge region.
    #[serde(rename = "w")]
    pub cap_width: usize,
    pub gamma0: f64,
    #[serde(rename = "p")]
    pub cap_exponent: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Record every k-th step; `None` picks the smallest stride keeping at
    /// most [`MAX_AUTO_SAMPLES`] samples.
    #[serde(rename = "stride")]
    pub sample_stride: Option<usize>,
    pub initial: Level,
}

impl EvolutionConfig {
    pub fn preset(preset: EvolutionPreset, initial: Level) -> Self {
        let (half_length, cap_width, dt) = match preset {
            EvolutionPreset::Desk => (1500, 900, 2e-3),
            EvolutionPreset::Paper => (5000, 3000, 1e-3),
        };
        EvolutionConfig {
            half_length,
            cap_width,
            gamma0: 0.6,
            cap_exponent: 2.0,
            dt,
            t_max: 2e4,
            sample_stride: None,
            initial,
        }
    }

    pub fn desk(initial: Level) -> Self {
        Self::preset(EvolutionPreset::Desk, initial)
    }

    pub fn paper(initial: Level) -> Self {
        Self::preset(EvolutionPreset::Paper, initial)
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        if self.half_length == 0 {
            return Err(EvolutionError::EmptyChain);
        }
        if self.cap_width >= self.half_length {
            return Err(EvolutionError::CapTooWide { w: self.cap_width, m: self.half_length });
        }
        if !(self.gamma0.is_finite() && self.gamma0 >= 0.0) {
            return Err(EvolutionError::CapStrength(self.gamma0));
        }
        if !(self.cap_exponent.is_finite() && self.cap_exponent > 0.0) {
            return Err(EvolutionError::CapExponent(self.cap_exponent));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(EvolutionError::NonPositiveStep(self.dt));
        }
        if !(self.t_max.is_finite() && self.t_max >= self.dt) {
            return Err(EvolutionError::TooShort { t_max: self.t_max, dt: self.dt });
        }
        if self.sample_stride == Some(0) {
            return Err(EvolutionError::ZeroStride);
        }
        Ok(())
    }

    /// Number of full steps; the run ends at `steps() * dt`.
    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round().max(1.0) as usize
    }

    pub fn stride(&self) -> usize {
        self.sample_stride.unwrap_or_else(|| self.steps().div_ceil(MAX_AUTO_SAMPLES).max(1))
    }

    /// Gershgorin bound on the spectral radius of the generator.
    pub fn spectral_bound(&self, model: &ModelConfig) -> f64 {
        let chain = model.e0.abs() + model.beta + self.gamma0 + model.g_a + model.g_b;
        let a = model.e_a.abs() + model.alpha.abs() + model.g_a;
        let b = model.e_b.abs() + model.g_b;
        chain.max(a).max(b)
    }

    /// Set when `dt` times the spectral bound exceeds [`STABILITY_LIMIT`].
    pub fn stability_advisory(&self, model: &ModelConfig) -> bool {
        self.dt * self.spectral_bound(model) > STABILITY_LIMIT
    }
}

/// On-site absorption rates `gamma_m` for `m = -M..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapProfile {
    half_length: usize,
    gamma: Vec<f64>,
}

impl CapProfile {
    pub fn get(&self, m: i64) -> f64 {
        self.gamma[(m + self.half_length as i64) as usize]
    }

    pub fn half_length(&self) -> usize {
        self.half_length
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gamma
    }
}

pub fn build_cap(evo: &EvolutionConfig) -> CapProfile {
    let m_max = evo.half_length as i64;
    let inner = (evo.half_length - evo.cap_width) as f64;
    let w = evo.cap_width as f64;
    let gamma = (-m_max..=m_max)
        .map(|m| {
            let depth = m.unsigned_abs() as f64 - inner;
            if depth > 0.0 && evo.gamma0 > 0.0 {
                evo.gamma0 * (depth / w).powf(evo.cap_exponent)
            } else {
                0.0
            }
        })
        .collect();
    CapProfile { half_length: evo.half_length, gamma }
}

/// Plain contiguous state `[dA, dB, c_{-M}, ..., c_M]` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionState {
    pub amplitudes: Vec<Complex64>,
    pub t: f64,
}

impl WavefunctionState {
    /// Level `initial` fully occupied, everything else empty, at `t = 0`.
    pub fn prepared(half_length: usize, initial: Level) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 2 * half_length + 3];
        amplitudes[level_slot(initial)] = Complex64::new(1.0, 0.0);
        WavefunctionState { amplitudes, t: 0.0 }
    }

    pub fn half_length(&self) -> usize {
        (self.amplitudes.len() - 3) / 2
    }

    pub fn d_a(&self) -> Complex64 {
        self.amplitudes[0]
    }

    pub fn d_b(&self) -> Complex64 {
        self.amplitudes[1]
    }

    pub fn level(&self, level: Level) -> Complex64 {
        self.amplitudes[level_slot(level)]
    }

    pub fn site(&self, m: i64) -> Complex64 {
        self.amplitudes[(m + self.half_length() as i64 + 2) as usize]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        WavefunctionState { amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(), t: self.t }
    }
}

fn level_slot(level: Level) -> usize {
    match level {
        Level::A => 0,
        Level::B => 1,
    }
}

fn drive_energy(model: &ModelConfig, t: f64) -> f64 {
    model.e_a + model.alpha * (model.omega * t).cos()
}

/// Time derivative of `state` at time `t`, written into `out`.
pub fn rhs(state: &[Complex64], t: f64, model: &ModelConfig, cap: &CapProfile, out: &mut [Complex64]) {
    let minus_i = Complex64::new(0.0, -1.0);
    let sites = &state[2..];
    let n = sites.len();
    let m0 = cap.half_length();
    let hop = 0.5 * model.beta;
    let (d_a, d_b) = (state[0], state[1]);
    let c0 = sites[m0];
    out[0] = minus_i * (drive_energy(model, t) * d_a + model.g_a * c0);
    out[1] = minus_i * (model.e_b * d_b + model.g_b * c0);
    for j in 0..n {
        let left = if j > 0 { sites[j - 1] } else { Complex64::new(0.0, 0.0) };
        let right = if j + 1 < n { sites[j + 1] } else { Complex64::new(0.0, 0.0) };
        let onsite = Complex64::new(model.e0, -cap.as_slice()[j]);
        let mut h = onsite * sites[j] - hop * (left + right);
        if j == m0 {
            h += model.g_a * d_a + model.g_b * d_b;
        }
        out[2 + j] = minus_i * h;
    }
}

/// One classical RK4 step of size `dt`.
pub fn rk4_step(state: &WavefunctionState, dt: f64, model: &ModelConfig, cap: &CapProfile) -> WavefunctionState {
    let len = state.amplitudes.len();
    let y = &state.amplitudes;
    let t = state.t;
    let mut k = vec![Complex64::default(); len];
    let mut stage = y.clone();
    let mut acc = y.clone();
    let weights = [dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0];
    let offsets = [0.0, 0.5 * dt, 0.5 * dt, dt];
    for s in 0..4 {
        rhs(&stage, t + offsets[s], model, cap, &mut k);
        for i in 0..len {
            acc[i] += weights[s] * k[i];
        }
        if s < 3 {
            let h = offsets[s + 1];
            for i in 0..len {
                stage[i] = y[i] + h * k[i];
            }
        }
    }
    WavefunctionState { amplitudes: acc, t: t + dt }
}

/// Split real/imaginary storage with one zero ghost site at each wall.
#[derive(Debug, Clone)]
struct Buffer {
    re: Vec<f64>,
    im: Vec<f64>,
    a: Complex64,
    b: Complex64,
}

impl Buffer {
    fn zeros(sites: usize) -> Self {
        Buffer { re: vec![0.0; sites + 2], im: vec![0.0; sites + 2], a: Complex64::default(), b: Complex64::default() }
    }

    fn copy_from(&mut self, other: &Buffer) {
        self.re.copy_from_slice(&other.re);
        self.im.copy_from_slice(&other.im);
        self.a = other.a;
        self.b = other.b;
    }

    fn site(&self, j: usize) -> Complex64 {
        Complex64::new(self.re[j + 1], self.im[j + 1])
    }

    fn norm(&self) -> f64 {
        let chain: f64 = self.re.iter().zip(&self.im).map(|(r, i)| r * r + i * i).sum();
        chain + self.a.norm_sqr() + self.b.norm_sqr()
    }
}

struct Scratch {
    stage: [Buffer; 2],
    acc: Buffer,
}

/// Allocation-free RK4 propagator used for long trajectories.
pub struct Propagator {
    model: ModelConfig,
    gamma: Vec<f64>,
    center: usize,
    window: (usize, usize),
    y: Buffer,
    scratch: Scratch,
}

impl Propagator {
    pub fn new(model: &ModelConfig, cap: &CapProfile, state: &WavefunctionState) -> Self {
        let sites = 2 * cap.half_length() + 1;
        let mut y = Buffer::zeros(sites);
        y.a = state.d_a();
        y.b = state.d_b();
        for (j, c) in state.amplitudes[2..].iter().enumerate() {
            y.re[j + 1] = c.re;
            y.im[j + 1] = c.im;
        }
        let scratch = Scratch { stage: [Buffer::zeros(sites), Buffer::zeros(sites)], acc: Buffer::zeros(sites) };
        let center = cap.half_length();
        let occupied = state.amplitudes[2..].iter().enumerate().filter(|(_, c)| c.norm() > 0.0);
        let (first, last) = occupied.fold((center, center), |(lo, hi), (j, _)| (lo.min(j), hi.max(j)));
        let window = (first.saturating_sub(WINDOW_PAD), (last + 1 + WINDOW_PAD).min(sites));
        Propagator { model: *model, gamma: cap.as_slice().to_vec(), center, window, y, scratch }
    }

    /// Advances the held state from `t` to `t + dt`.
    pub fn step(&mut self, t: f64, dt: f64) {
        rk4_fast(&self.model, &self.gamma, self.center, self.window, &mut self.y, &mut self.scratch, t, dt);
        self.grow_window();
    }

    /// Sites outside the window are exactly zero. The window widens whenever
    /// its outermost sites pick up more than [`NEGLIGIBLE`], which keeps the
    /// super-exponentially small tail ahead of the wavefront (and its
    /// subnormal arithmetic) out of the inner loop.
    fn grow_window(&mut self) {
        let (lo, hi) = self.window;
        let touched = |j: usize| self.y.re[j + 1].abs().max(self.y.im[j + 1].abs()) > NEGLIGIBLE;
        if lo > 0 && (touched(lo) || touched(lo + 1)) {
            self.window.0 = lo.saturating_sub(WINDOW_PAD);
        }
        if hi < self.gamma.len() && (touched(hi - 1) || touched(hi - 2)) {
            self.window.1 = (hi + WINDOW_PAD).min(self.gamma.len());
        }
    }

    /// Half-open range of sites currently integrated.
    pub fn window(&self) -> (usize, usize) {
        self.window
    }

    pub fn level(&self, level: Level) -> Complex64 {
        match level {
            Level::A => self.y.a,
            Level::B => self.y.b,
        }
    }

    pub fn norm(&self) -> f64 {
        self.y.norm()
    }

    pub fn state(&self, t: f64) -> WavefunctionState {
        let mut amplitudes = vec![self.y.a, self.y.b];
        amplitudes.extend((0..self.gamma.len()).map(|j| self.y.site(j)));
        WavefunctionState { amplitudes, t }
    }

    /// Survival amplitude of `level` at `t + dt` without disturbing the
    /// held state.
    fn probe(&mut self, probe: &mut Buffer, level: Level, t: f64, dt: f64) -> (f64, f64) {
        probe.copy_from(&self.y);
        let (model, gamma) = (&self.model, &self.gamma);
        rk4_fast(model, gamma, self.center, self.window, probe, &mut self.scratch, t, dt);
        let d = match level {
            Level::A => probe.a,
            Level::B => probe.b,
        };
        (d.norm_sqr(), probe.norm())
    }
}

#[allow(clippy::too_many_arguments)]
fn rk4_fast(
    model: &ModelConfig,
    gamma: &[f64],
    center: usize,
    window: (usize, usize),
    y: &mut Buffer,
    scratch: &mut Scratch,
    t: f64,
    dt: f64,
) {
    let [s1, s2] = &mut scratch.stage;
    let acc = &mut scratch.acc;
    let half = 0.5 * dt;
    let sites = Sites { model, gamma, center, window };
    sites.stage::<true>(y, t, y, s1, half, acc, dt / 6.0);
    sites.stage::<false>(s1, t + half, y, s2, half, acc, dt / 3.0);
    sites.stage::<false>(s2, t + half, y, s1, dt, acc, dt / 3.0);
    sites.stage::<false>(s1, t + dt, y, s2, 0.0, acc, dt / 6.0);
    std::mem::swap(y, acc);
}

struct Sites<'a> {
    model: &'a ModelConfig,
    gamma: &'a [f64],
    center: usize,
    /// Half-open range of sites being updated.
    window: (usize, usize),
}

impl Sites<'_> {
    /// Evaluates `k = f(src, t)` and writes `out = y + h k` and `acc += w k`
    /// (or `acc = y + w k` on the first stage).
    #[allow(clippy::too_many_arguments)]
    #[inline(always)]
    fn stage<const FIRST: bool>(
        &self,
        src: &Buffer,
        t: f64,
        y: &Buffer,
        out: &mut Buffer,
        h: f64,
        acc: &mut Buffer,
        w: f64,
    ) {
        let model = self.model;
        let (lo, hi) = self.window;
        let len = hi - lo;
        let e0 = model.e0;
        let hop = 0.5 * model.beta;
        // Site j lives at buffer index j + 1; indices 0 and n + 1 are walls.
        let (left_r, mid_r, right_r) =
            (&src.re[lo..lo + len], &src.re[lo + 1..lo + 1 + len], &src.re[lo + 2..lo + 2 + len]);
        let (left_i, mid_i, right_i) =
            (&src.im[lo..lo + len], &src.im[lo + 1..lo + 1 + len], &src.im[lo + 2..lo + 2 + len]);
        let (yr, yi) = (&y.re[lo + 1..lo + 1 + len], &y.im[lo + 1..lo + 1 + len]);
        let (or, oi) = (&mut out.re[lo + 1..lo + 1 + len], &mut out.im[lo + 1..lo + 1 + len]);
        let (ar, ai) = (&mut acc.re[lo + 1..lo + 1 + len], &mut acc.im[lo + 1..lo + 1 + len]);
        let gamma = &self.gamma[lo..lo + len];
        for j in 0..len {
            let (cr, ci) = (mid_r[j], mid_i[j]);
            let hr = e0 * cr + gamma[j] * ci - hop * (left_r[j] + right_r[j]);
            let hi = e0 * ci - gamma[j] * cr - hop * (left_i[j] + right_i[j]);
            // k = -i h
            let (kr, ki) = (hi, -hr);
            or[j] = yr[j] + h * kr;
            oi[j] = yi[j] + h * ki;
            if FIRST {
                ar[j] = yr[j] + w * kr;
                ai[j] = yi[j] + w * ki;
            } else {
                ar[j] += w * kr;
                ai[j] += w * ki;
            }
        }

        // Level couplings at site 0.
        let c = self.center - lo;
        let minus_i = Complex64::new(0.0, -1.0);
        let c0 = src.site(self.center);
        let feed = minus_i * (model.g_a * src.a + model.g_b * src.b);
        or[c] += h * feed.re;
        oi[c] += h * feed.im;
        ar[c] += w * feed.re;
        ai[c] += w * feed.im;

        let ka = minus_i * (drive_energy(model, t) * src.a + model.g_a * c0);
        let kb = minus_i * (model.e_b * src.b + model.g_b * c0);
        out.a = y.a + h * ka;
        out.b = y.b + h * kb;
        if FIRST {
            acc.a = y.a + w * ka;
            acc.b = y.b + w * kb;
        } else {
            acc.a += w * ka;
            acc.b += w * kb;
        }
    }
}

/// Survival probability of the prepared level over one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSeries {
    pub initial: Level,
    /// Uniformly strided samples.
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    pub norm: Vec<f64>,
    /// Samples at exact multiples of the drive period.
    pub strobe_times: Vec<f64>,
    pub strobe_survival: Vec<f64>,
    pub strobe_norm: Vec<f64>,
    pub model: ModelConfig,
    pub evolution: EvolutionConfig,
    pub version: String,
}

impl SurvivalSeries {
    /// `P_A(t)` when A was prepared.
    pub fn p_a(&self) -> Option<&[f64]> {
        (self.initial == Level::A).then_some(self.survival.as_slice())
    }

    /// `P_B(t)` when B was prepared.
    pub fn p_b(&self) -> Option<&[f64]> {
        (self.initial == Level::B).then_some(self.survival.as_slice())
    }

    pub fn final_survival(&self) -> f64 {
        *self.survival.last().expect("series holds at least the t = 0 sample")
    }

    /// Linear interpolation of the uniform samples at `t`.
    pub fn survival_at(&self, t: f64) -> Option<f64> {
        let i = self.times.partition_point(|&s| s < t);
        if i == self.times.len() {
            return None;
        }
        if self.times[i] == t || i == 0 {
            return (self.times[i] == t).then_some(self.survival[i]);
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let f = (t - t0) / (t1 - t0);
        Some(self.survival[i - 1] * (1.0 - f) + self.survival[i] * f)
    }

    pub fn min_survival(&self) -> f64 {
        self.survival.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn evolve(model: &ValidatedConfig, evo: &EvolutionConfig) -> Result<SurvivalSeries, EvolutionError> {
    evo.validate()?;
    let cap = build_cap(evo);
    let level = evo.initial;
    let state = WavefunctionState::prepared(evo.half_length, level);
    let mut prop = Propagator::new(model, &cap, &state);
    let mut probe = prop.y.clone();

    let steps = evo.steps();
    let stride = evo.stride();
    let dt = evo.dt;
    let t_end = steps as f64 * dt;
    let period = TAU / model.omega;
    let strobe_count = (t_end / period).floor() as usize + 1;

    let mut series = SurvivalSeries {
        initial: level,
        times: Vec::with_capacity(steps / stride + 2),
        survival: Vec::with_capacity(steps / stride + 2),
        norm: Vec::with_capacity(steps / stride + 2),
        strobe_times: Vec::with_capacity(strobe_count),
        strobe_survival: Vec::with_capacity(strobe_count),
        strobe_norm: Vec::with_capacity(strobe_count),
        model: **model,
        evolution: *evo,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let record = |series: &mut SurvivalSeries, t: f64, p: f64, norm: f64| {
        series.times.push(t);
        series.survival.push(p);
        series.norm.push(norm);
    };
    record(&mut series, 0.0, 1.0, prop.norm());
    series.strobe_times.push(0.0);
    series.strobe_survival.push(1.0);
    series.strobe_norm.push(prop.norm());
    let mut next_strobe = 1usize;
    let mut last_good = 0.0;

    for k in 0..steps {
        let t = k as f64 * dt;
        let t_next = (k + 1) as f64 * dt;
        // Periods ending strictly inside this step are sampled on a probe
        // copy so the main grid stays uniform.
        while next_strobe < strobe_count {
            let ts = next_strobe as f64 * period;
            if ts >= t_next - 1e-9 * dt {
                break;
            }
            let (p, norm) = prop.probe(&mut probe, level, t, ts - t);
            if !norm.is_finite() {
                return Err(EvolutionError::NonFiniteState { last_good });
            }
            series.strobe_times.push(ts);
            series.strobe_survival.push(p);
            series.strobe_norm.push(norm);
            next_strobe += 1;
        }
        prop.step(t, dt);
        let on_strobe = next_strobe < strobe_count && (next_strobe as f64 * period - t_next).abs() <= 1e-9 * dt;
        let on_sample = (k + 1) % stride == 0 || k + 1 == steps;
        if on_strobe || on_sample {
            let p = prop.level(level).norm_sqr();
            let norm = prop.norm();
            if !norm.is_finite() {
                return Err(EvolutionError::NonFiniteState { last_good });
            }
            last_good = t_next;
            if on_strobe {
                series.strobe_times.push(next_strobe as f64 * period);
                series.strobe_survival.push(p);
                series.strobe_norm.push(norm);
                next_strobe += 1;
            }
            if on_sample {
                record(&mut series, t_next, p, norm);
            }
        }
    }
    Ok(series)
}
