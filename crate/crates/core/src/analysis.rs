//! Decay-rate fits, pole versus time-domain comparison, parameter sweeps and
//! the Bessel/coupling scaling audit.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{converge_truncation, DispersionVariant, Pole, SolverError, SolverOptions};
use crate::evolution::{evolve, EvolutionConfig, SurvivalSeries};
use crate::model::{classify_energy, Level, ModelConfig, ModelError};
use crate::selfenergy::bessel_j;

/// Fewest samples a fit accepts.
pub const MIN_FIT_POINTS: usize = 10;
/// Samples at or below this probability are skipped by the log fit.
pub const MIN_FIT_PROBABILITY: f64 = 1e-12;
/// Relative rate mismatch tolerated between pole and fit.
pub const RATE_TOLERANCE: f64 = 0.05;
/// Successive-cutoff pole change accepted by sweeps.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("only {found} usable samples in the fit window (need {MIN_FIT_POINTS})")]
    InsufficientData { found: usize },
    #[error("degenerate scaling grid: {0}")]
    DegenerateGrid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitMethod {
    /// Samples at `t = nT` only.
    Stroboscopic,
    /// All uniformly strided samples, micromotion included.
    Envelope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl FitWindow {
    /// `[0.1 t_max, t_max]`, skipping the early non-exponential transient.
    pub fn default_for(t_max: f64) -> Self {
        FitWindow { t_lo: 0.1 * t_max, t_hi: t_max }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_lo && t <= self.t_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitOutcome {
    Decaying,
    /// No decay beyond twice the slope's standard error.
    NonDecaying,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `-slope / 2`, so that `P ~ exp(-2 gamma t)`.
    pub gamma_fit: f64,
    pub gamma_stderr: f64,
    /// `ln P` at `t = 0` from the fitted line.
    pub intercept: f64,
    pub window: FitWindow,
    pub r_squared: f64,
    pub n_points: usize,
    pub method: FitMethod,
    pub outcome: FitOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct LineFit {
    slope: f64,
    intercept: f64,
    r_squared: f64,
    slope_stderr: f64,
}

/// Ordinary least squares `y = a + b x`. `R^2` is 1 when `y` is constant.
fn ols(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    let slope_stderr = if x.len() > 2 { (ss_res / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    LineFit { slope, intercept, r_squared, slope_stderr }
}

/// Log-linear fit of the series inside `window`.
pub fn fit_decay(series: &SurvivalSeries, window: FitWindow, method: FitMethod) -> Result<DecayFit, AnalysisError> {
    let (times, survival) = match method {
        FitMethod::Stroboscopic => (&series.strobe_times, &series.strobe_survival),
        FitMethod::Envelope => (&series.times, &series.survival),
    };
    fit_samples(times, survival, window, method)
}

/// [`fit_decay`] on bare sample arrays.
pub fn fit_samples(
    times: &[f64],
    survival: &[f64],
    window: FitWindow,
    method: FitMethod,
) -> Result<DecayFit, AnalysisError> {
    let (t, ln_p): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(survival)
        .filter(|(&t, &p)| window.contains(t) && p > MIN_FIT_PROBABILITY)
        .map(|(&t, &p)| (t, p.ln()))
        .unzip();
    if t.len() < MIN_FIT_POINTS {
        return Err(AnalysisError::InsufficientData { found: t.len() });
    }
    let line = ols(&t, &ln_p);
    let gamma_fit = -0.5 * line.slope;
    let gamma_stderr = 0.5 * line.slope_stderr;
    let outcome = if gamma_fit > 2.0 * gamma_stderr { FitOutcome::Decaying } else { FitOutcome::NonDecaying };
    Ok(DecayFit {
        gamma_fit,
        gamma_stderr,
        intercept: line.intercept,
        window,
        r_squared: line.r_squared,
        n_points: t.len(),
        method,
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleTimeComparison {
    pub gamma_pole: f64,
    pub fit: DecayFit,
    /// `|gamma_fit / gamma_pole - 1|`; absent for a real pole.
    pub rate_discrepancy: Option<f64>,
    /// Largest `|P(nT) - P(0) exp(-2 gamma_pole nT)|` over stroboscopic samples.
    pub max_envelope_deviation: f64,
    /// Rates agree within [`RATE_TOLERANCE`] (or both vanish).
    pub consistent: bool,
}

impl fmt::Display for PoleTimeComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gamma_pole {:.6e}, gamma_fit {:.6e} (R^2 {:.6}), ",
            self.gamma_pole, self.fit.gamma_fit, self.fit.r_squared
        )?;
        match self.rate_discrepancy {
            Some(d) => write!(f, "rate mismatch {:.2}%", 100.0 * d)?,
            None => write!(f, "real pole")?,
        }
        if !self.consistent {
            write!(f, " MISMATCH")?;
        }
        Ok(())
    }
}

pub fn compare_pole_vs_time(
    pole: &Pole,
    series: &SurvivalSeries,
    window: FitWindow,
) -> Result<PoleTimeComparison, AnalysisError> {
    let fit = fit_decay(series, window, FitMethod::Stroboscopic)?;
    let gamma_pole = pole.gamma;
    let p0 = series.strobe_survival.first().copied().unwrap_or(1.0);
    let max_envelope_deviation = series
        .strobe_times
        .iter()
        .zip(&series.strobe_survival)
        .map(|(&t, &p)| (p - p0 * (-2.0 * gamma_pole * t).exp()).abs())
        .fold(0.0, f64::max);
    let rate_discrepancy = (gamma_pole > 0.0).then(|| (fit.gamma_fit / gamma_pole - 1.0).abs());
    let consistent = match rate_discrepancy {
        Some(d) => d < RATE_TOLERANCE,
        None => fit.outcome == FitOutcome::NonDecaying,
    };
    Ok(PoleTimeComparison { gamma_pole, fit, rate_discrepancy, max_envelope_deviation, consistent })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Drive frequency at fixed `chi`.
    Omega,
    /// Bessel argument `chi = alpha / omega` at fixed frequency.
    Chi,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "omega" => Ok(SweepAxis::Omega),
            "chi" => Ok(SweepAxis::Chi),
            _ => Err(format!("unknown sweep axis '{s}' (expected omega or chi)")),
        }
    }
}

impl SweepAxis {
    pub fn apply(self, base: &ModelConfig, value: f64) -> ModelConfig {
        match self {
            SweepAxis::Omega => base.with_omega_fixed_chi(value),
            SweepAxis::Chi => base.with_chi(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub variant: DispersionVariant,
    pub truncation_tol: f64,
    pub solver: SolverOptions,
    /// Run a trajectory per row and fit it.
    pub evolution: Option<EvolutionConfig>,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            variant: DispersionVariant::ScalarB0Exact,
            truncation_tol: DEFAULT_TRUNCATION_TOL,
            solver: SolverOptions::default(),
            evolution: None,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub omega: f64,
    pub chi: f64,
    pub gamma_pole: Option<f64>,
    pub pole_re: Option<f64>,
    pub gamma_fit: Option<f64>,
    pub r_squared: Option<f64>,
    /// The solved level's pole real part lies inside a replica band (bare
    /// energy when the solve failed).
    pub replica_flag_b: bool,
    /// Same for level A.
    pub replica_flag_a: bool,
    /// `ok`, or the error that stopped this row.
    pub status: String,
    #[serde(skip)]
    pub pole: Option<Pole>,
}

fn level_in_replica(config: &ModelConfig, level: Level, energy: f64) -> bool {
    classify_energy(config, level, energy, REPLICA_SCAN).is_inside_any()
}

const REPLICA_SCAN: usize = 4;

/// Pole (and optionally a fitted trajectory) at one grid point.
pub fn sweep_point(config: &ModelConfig, options: &SweepOptions) -> SweepRow {
    let level = options.variant.level();
    let mut row = SweepRow {
        omega: config.omega,
        chi: config.alpha.abs() / config.omega,
        gamma_pole: None,
        pole_re: None,
        gamma_fit: None,
        r_squared: None,
        replica_flag_b: level_in_replica(config, Level::B, config.e_b),
        replica_flag_a: level_in_replica(config, Level::A, config.e_a),
        status: "ok".into(),
        pole: None,
    };
    let validated = match config.validate() {
        Ok(v) => v,
        Err(e) => {
            row.status = format!("invalid config: {e}");
            return row;
        }
    };
    match converge_truncation(options.variant, None, &validated, options.truncation_tol, &options.solver) {
        Ok((_, pole)) => {
            row.gamma_pole = Some(pole.gamma);
            row.pole_re = Some(pole.z.re);
            let inside = level_in_replica(config, level, pole.z.re);
            match level {
                Level::A => row.replica_flag_a = inside,
                Level::B => row.replica_flag_b = inside,
            }
            row.pole = Some(pole);
        }
        Err(e) => {
            row.status = format!("pole failed: {e}");
            return row;
        }
    }
    if let Some(evo) = options.evolution {
        let evo = EvolutionConfig { initial: level, ..evo };
        let fitted = evolve(&validated, &evo).map_err(|e| e.to_string()).and_then(|series| {
            fit_decay(&series, FitWindow::default_for(evo.t_max), FitMethod::Stroboscopic).map_err(|e| e.to_string())
        });
        match fitted {
            Ok(fit) => {
                row.gamma_fit = Some(fit.gamma_fit);
                row.r_squared = Some(fit.r_squared);
            }
            Err(e) => row.status = format!("evolution failed: {e}"),
        }
    }
    row
}

/// Solves every grid point in parallel; rows come back sorted by the swept value.
pub fn sweep(axis: SweepAxis, grid: &[f64], base: &ModelConfig, options: &SweepOptions) -> Vec<SweepRow> {
    let run = || -> Vec<SweepRow> { grid.par_iter().map(|&v| sweep_point(&axis.apply(base, v), options)).collect() };
    let mut rows = match options.jobs {
        Some(jobs) => match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    };
    let key = |r: &SweepRow| match axis {
        SweepAxis::Omega => r.omega,
        SweepAxis::Chi => r.chi,
    };
    rows.sort_by(|a, b| key(a).total_cmp(&key(b)));
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiPoint {
    pub chi: f64,
    pub gamma: f64,
    /// `J0(chi)^2 J1(chi)^2`.
    pub bessel_weight: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingPoint {
    pub g: f64,
    /// Frequency at which the pole keeps the reference distance to the
    /// n = 1 lower edge.
    pub omega: f64,
    pub gamma: f64,
    pub pole_re: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub chi_points: Vec<ChiPoint>,
    /// `(max - min) / mean` of the ratio column.
    pub ratio_spread: f64,
    pub coupling_points: Vec<CouplingPoint>,
    /// Slope of `ln gamma` against `ln g` with `gA = gB = g`.
    pub coupling_slope: f64,
    /// Distance of the pole real part above the n = 1 lower edge held fixed
    /// across the coupling points.
    pub edge_offset: f64,
}

fn b_pole(config: &ModelConfig, solver: &SolverOptions) -> Result<Pole, AnalysisError> {
    let validated = config.validate()?;
    let (_, pole) =
        converge_truncation(DispersionVariant::ScalarB0Exact, None, &validated, DEFAULT_TRUNCATION_TOL, solver)?;
    Ok(pole)
}

/// Frequency at which the B pole sits `offset` above the n = 1 lower edge.
///
/// The pole real part drifts only weakly with the frequency, so the
/// fixed-point map `omega <- Re z(omega) - (e0 - beta) - offset` settles in a
/// few iterations.
pub fn edge_tracked_omega(
    base: &ModelConfig,
    offset: f64,
    solver: &SolverOptions,
) -> Result<(f64, Pole), AnalysisError> {
    let mut omega = base.omega;
    let mut pole = b_pole(&base.with_omega_fixed_chi(omega), solver)?;
    for _ in 0..50 {
        let next = pole.z.re - (base.e0 - base.beta) - offset;
        let settled = (next - omega).abs() < 1e-13;
        omega = next;
        pole = b_pole(&base.with_omega_fixed_chi(omega), solver)?;
        if settled {
            break;
        }
    }
    Ok((omega, pole))
}

/// Ratio `gamma_B / (J0^2 J1^2)` over `chi_grid` at the base frequency, and
/// the `gamma_B` against `g` slope over `g_grid`.
///
/// The coupling points are not taken at a fixed frequency: the level shift
/// scales as `g^2` and would move the pole across the replica edge, where
/// the rate switches off. Each coupling instead gets the frequency that keeps
/// the pole at the base configuration's distance from the edge, which isolates
/// the `g` dependence of the rate.
pub fn scaling_audit(
    chi_grid: &[f64],
    g_grid: &[f64],
    base: &ModelConfig,
    solver: &SolverOptions,
) -> Result<ScalingReport, AnalysisError> {
    if chi_grid.is_empty() {
        return Err(AnalysisError::DegenerateGrid("empty chi grid".into()));
    }
    if g_grid.len() < 2 {
        return Err(AnalysisError::DegenerateGrid("need at least two couplings".into()));
    }
    let chi_points = chi_grid
        .par_iter()
        .map(|&chi| {
            let weight = (bessel_j(0, chi) * bessel_j(1, chi)).powi(2);
            if weight < 1e-8 {
                return Err(AnalysisError::DegenerateGrid(format!("chi = {chi} is at a Bessel zero")));
            }
            let pole = b_pole(&base.with_chi(chi), solver)?;
            Ok(ChiPoint { chi, gamma: pole.gamma, bessel_weight: weight, ratio: pole.gamma / weight })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let ratios: Vec<f64> = chi_points.iter().map(|p| p.ratio).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let ratio_spread = (hi - lo) / mean;

    let reference = b_pole(base, solver)?;
    let edge_offset = reference.z.re - (base.e0 - base.beta + base.omega);
    let coupling_points = g_grid
        .par_iter()
        .map(|&g| {
            let cfg = base.with_couplings(g, g);
            let (omega, pole) = edge_tracked_omega(&cfg, edge_offset, solver)?;
            Ok(CouplingPoint { g, omega, gamma: pole.gamma, pole_re: pole.z.re })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    if coupling_points.iter().any(|p| p.gamma <= 0.0) {
        return Err(AnalysisError::DegenerateGrid("a coupling point has a real pole".into()));
    }
    let x: Vec<f64> = coupling_points.iter().map(|p| p.g.ln()).collect();
    let y: Vec<f64> = coupling_points.iter().map(|p| p.gamma.ln()).collect();
    let coupling_slope = ols(&x, &y).slope;
    Ok(ScalingReport { chi_points, ratio_spread, coupling_points, coupling_slope, edge_offset })
}

/// Parses `start:stop:step` (inclusive, with a half-step margin) or a comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad number '{s}' in grid"));
    if let Some((start, rest)) = spec.split_once(':') {
        let (stop, step) = rest.split_once(':').ok_or("range grid needs start:stop:step")?;
        let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err("range grid needs step > 0 and stop >= start".into());
        }
        let count = ((stop - start) / step + 0.5).floor() as usize;
        return Ok((0..=count).map(|i| start + i as f64 * step).collect());
    }
    let grid = spec.split(',').map(parse).collect::<Result<Vec<_>, _>>()?;
    if grid.is_empty() {
        return Err("empty grid".into());
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(gamma: f64, t_max: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..=n).map(|i| t_max * i as f64 / n as f64).collect();
        let p = t.iter().map(|&t| (-2.0 * gamma * t).exp()).collect();
        (t, p)
    }

    #[test]
    fn exact_exponential_recovered() {
        let (t, p) = synthetic(2.6346e-5, 2e4, 400);
        let fit = fit_samples(&t, &p, FitWindow::default_for(2e4), FitMethod::Stroboscopic).unwrap();
        assert!((fit.gamma_fit - 2.6346e-5).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.outcome, FitOutcome::Decaying);
        assert!(fit.n_points >= MIN_FIT_POINTS);
    }

    #[test]
    fn rates_across_decades() {
        for &gamma in &[1e-6, 1e-5, 1e-4, 1e-3, 1e-2] {
            let t_max = 5.0 / gamma;
            let (t, p) = synthetic(gamma, t_max, 1000);
            let fit = fit_samples(&t, &p, FitWindow::default_for(t_max), FitMethod::Envelope).unwrap();
            assert!((fit.gamma_fit / gamma - 1.0).abs() < 1e-6, "{gamma}: {}", fit.gamma_fit);
        }
    }

    #[test]
    fn flat_and_growing_series_are_non_decaying() {
        let t: Vec<f64> = (0..100).map(f64::from).collect();
        let flat = vec![1.0; 100];
        let fit = fit_samples(&t, &flat, FitWindow { t_lo: 0.0, t_hi: 99.0 }, FitMethod::Envelope).unwrap();
        assert_eq!(fit.outcome, FitOutcome::NonDecaying);
        assert_eq!(fit.r_squared, 1.0);
        let growing: Vec<f64> = t.iter().map(|t| 0.5 * (1e-3 * t).exp()).collect();
        let fit = fit_samples(&t, &growing, FitWindow { t_lo: 0.0, t_hi: 99.0 }, FitMethod::Envelope).unwrap();
        assert_eq!(fit.outcome, FitOutcome::NonDecaying);
        assert!(fit.gamma_fit < 0.0);
    }

    #[test]
    fn too_few_points() {
        let (t, p) = synthetic(1e-3, 10.0, 8);
        let err = fit_samples(&t, &p, FitWindow { t_lo: 0.0, t_hi: 10.0 }, FitMethod::Envelope);
        assert_eq!(err, Err(AnalysisError::InsufficientData { found: 9 }));
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("1,2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        let g = parse_grid("0:3:0.05").unwrap();
        assert_eq!(g.len(), 61);
        assert!((g[60] - 3.0).abs() < 1e-12);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn omega_axis_holds_chi() {
        let base = ModelConfig::replica_edge(2.3025, 1.081978);
        let moved = SweepAxis::Omega.apply(&base, 2.31);
        assert!((moved.alpha / moved.omega - 1.081978).abs() < 1e-14);
        let rechi = SweepAxis::Chi.apply(&base, 2.0);
        assert_eq!(rechi.omega, 2.3025);
        assert!((rechi.alpha - 2.0 * 2.3025).abs() < 1e-14);
    }

    #[test]
    fn uncoupled_sweep_has_no_width() {
        let base = ModelConfig::replica_edge(2.3025, 1.081978).with_couplings(0.0, 0.0);
        let rows = sweep(SweepAxis::Omega, &[2.3040, 2.3000, 2.3025], &base, &SweepOptions::default());
        assert_eq!(rows.iter().map(|r| r.omega).collect::<Vec<_>>(), vec![2.3000, 2.3025, 2.3040]);
        for row in rows {
            assert_eq!(row.status, "ok");
            assert_eq!(row.gamma_pole, Some(0.0));
            // At omega = 2.3 the seed sits on a branch point and is nudged off it.
            assert!((row.pole_re.unwrap() - 1.30).abs() < 1e-11);
        }
    }

    #[test]
    fn rate_switches_off_when_pole_leaves_replica() {
        let base = ModelConfig::replica_edge(2.3025, 1.081978);
        let grid: Vec<f64> = (0..=12).map(|i| 2.3000 + 0.0005 * f64::from(i)).collect();
        let rows = sweep(SweepAxis::Omega, &grid, &base, &SweepOptions::default());
        let mut closed = false;
        for row in &rows {
            let gamma = row.gamma_pole.unwrap();
            assert!(gamma >= 0.0);
            let edge = row.omega - 1.0;
            if row.pole_re.unwrap() < edge {
                closed = true;
                assert_eq!(gamma, 0.0, "omega {}", row.omega);
                assert!(!row.replica_flag_b);
            } else {
                assert!(!closed, "rate reappeared at omega {}", row.omega);
                assert!(gamma > 0.0 && row.replica_flag_b);
            }
        }
        assert!(closed);
    }

    #[test]
    fn bad_row_does_not_stop_sweep() {
        let base = ModelConfig::replica_edge(2.3025, 1.081978);
        let rows = sweep(SweepAxis::Omega, &[-1.0, 2.3025], &base, &SweepOptions::default());
        assert!(rows[0].status.starts_with("invalid config"));
        assert_eq!(rows[1].status, "ok");
    }
}
