//! Local Green's function of the tight-binding chain, `zeta(z) = ∫dk/2π 1/(z - e0 + beta cos k)`,
//! in closed form with explicit Riemann-sheet selection, and a k-space quadrature
//! used only as an oracle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelConfig;

pub const DEFAULT_BRANCH_GUARD: f64 = 1e-14;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
/// Upper bound on trapezoid nodes for the quadrature oracle.
pub const DEFAULT_QUAD_POINTS: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreensError {
    #[error("energy {energy} lies outside the open band ({lower}, {upper})")]
    OutsideBand { energy: f64, lower: f64, upper: f64 },
    #[error("argument {0} is within the guard of a band-edge branch point")]
    BranchPoint(Complex64),
    #[error("quadrature oracle requires Im z > 0 (got {0})")]
    NotUpperHalfPlane(Complex64),
    #[error("quadrature did not reach tolerance at z = {z}: error estimate {estimate:e}")]
    NonConvergent { z: Complex64, estimate: f64 },
}

/// Riemann sheet of the band square root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sheet {
    /// Retarded branch, `zeta ~ 1/z` at large `|z|`.
    Physical,
    /// Continuation of the physical branch downward through the cut.
    Second,
}

impl Sheet {
    pub fn tag(self) -> char {
        match self {
            Sheet::Physical => 'P',
            Sheet::Second => 'S',
        }
    }
}

/// Numerical knobs for the Green's function and its oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreensOptions {
    pub branch_guard: f64,
    pub quad_tol: f64,
    pub quad_points: usize,
}

impl Default for GreensOptions {
    fn default() -> Self {
        GreensOptions {
            branch_guard: DEFAULT_BRANCH_GUARD,
            quad_tol: DEFAULT_QUAD_TOL,
            quad_points: DEFAULT_QUAD_POINTS,
        }
    }
}

/// A sampled value of a channel Green's function together with where it was taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreensValue {
    pub z: Complex64,
    pub n: i32,
    pub value: Complex64,
    pub sheet: Sheet,
}

/// Density of states factor `1/sqrt(beta^2 - (eps - e0)^2)` inside the band.
pub fn dos(epsilon: f64, config: &ModelConfig) -> Result<f64, GreensError> {
    let x = epsilon - config.e0;
    if x.abs() >= config.beta {
        return Err(GreensError::OutsideBand {
            energy: epsilon,
            lower: config.e0 - config.beta,
            upper: config.e0 + config.beta,
        });
    }
    Ok(1.0 / ((config.beta - x) * (config.beta + x)).sqrt())
}

/// `zeta0` with the default branch guard.
pub fn zeta0(z: Complex64, sheet: Sheet, config: &ModelConfig) -> Result<Complex64, GreensError> {
    zeta0_guarded(z, sheet, config, DEFAULT_BRANCH_GUARD)
}

/// Closed form `1/sqrt((z-e0)^2 - beta^2)`.
///
/// On the physical sheet the root is `u sqrt(1 - beta^2/u^2)` with `u = z - e0`,
/// whose only cut is the band `[-beta, beta]`; on the cut itself the value is
/// the retarded limit from above. The second sheet is the negated root.
pub fn zeta0_guarded(z: Complex64, sheet: Sheet, config: &ModelConfig, guard: f64) -> Result<Complex64, GreensError> {
    let beta = config.beta;
    let u = z - config.e0;
    if (u * u - beta * beta).norm() < guard {
        return Err(GreensError::BranchPoint(z));
    }
    let root = if u.im == 0.0 {
        let x = u.re;
        if x.abs() < beta {
            Complex64::new(0.0, ((beta - x) * (beta + x)).sqrt())
        } else {
            Complex64::new(x.signum() * ((x - beta) * (x + beta)).sqrt(), 0.0)
        }
    } else {
        let w = Complex64::new(1.0, 0.0) - (beta * beta) / (u * u);
        u * w.sqrt()
    };
    let value = root.inv();
    Ok(match sheet {
        Sheet::Physical => value,
        Sheet::Second => -value,
    })
}

/// Floquet-channel Green's function `zeta^(n)(z) = zeta0(z - n omega)`.
pub fn zeta_n(n: i32, z: Complex64, sheet: Sheet, config: &ModelConfig) -> Result<Complex64, GreensError> {
    zeta0(z - f64::from(n) * config.omega, sheet, config)
}

/// Sheet used for channel `n` while searching for a pole at `z`: the second
/// sheet iff `Re(z - n omega)` lies inside the static band and `Im z < 0`.
pub fn pole_search_sheet(n: i32, z: Complex64, config: &ModelConfig) -> Sheet {
    let x = z.re - f64::from(n) * config.omega - config.e0;
    if z.im < 0.0 && x.abs() < config.beta {
        Sheet::Second
    } else {
        Sheet::Physical
    }
}

/// How sheets are chosen when a kernel needs `zeta^(n)` at some `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SheetPolicy {
    /// Physical sheet for every channel.
    Physical,
    /// The per-channel rule of [`pole_search_sheet`].
    PoleSearch,
}

impl SheetPolicy {
    pub fn sheet(self, n: i32, z: Complex64, config: &ModelConfig) -> Sheet {
        match self {
            SheetPolicy::Physical => Sheet::Physical,
            SheetPolicy::PoleSearch => pole_search_sheet(n, z, config),
        }
    }
}

/// Channel `n` evaluated under a sheet policy, with the sheet recorded.
pub fn zeta_n_value(
    n: i32,
    z: Complex64,
    policy: SheetPolicy,
    config: &ModelConfig,
    guard: f64,
) -> Result<GreensValue, GreensError> {
    let sheet = policy.sheet(n, z, config);
    let value = zeta0_guarded(z - f64::from(n) * config.omega, sheet, config, guard)?;
    Ok(GreensValue { z, n, value, sheet })
}

fn trapezoid(z: Complex64, config: &ModelConfig, points: usize) -> Complex64 {
    // Periodic integrand: the plain trapezoid rule converges exponentially.
    // Summed in blocks to keep rounding growth small.
    let h = std::f64::consts::TAU / points as f64;
    let u = z - config.e0;
    let mut total = Complex64::new(0.0, 0.0);
    let mut block = Complex64::new(0.0, 0.0);
    for j in 0..points {
        let k = -std::f64::consts::PI + h * j as f64;
        block += (u + config.beta * k.cos()).inv();
        if j % 256 == 255 {
            total += block;
            block = Complex64::new(0.0, 0.0);
        }
    }
    (total + block) / points as f64
}

/// Direct k-space quadrature of the defining integral, upper half-plane only.
///
/// Node count doubles from 64 until successive estimates agree to `quad_tol`;
/// the returned finer estimate is then accurate to roughly `quad_tol^2`.
pub fn zeta0_quadrature(z: Complex64, config: &ModelConfig, options: &GreensOptions) -> Result<Complex64, GreensError> {
    if z.im <= 0.0 {
        return Err(GreensError::NotUpperHalfPlane(z));
    }
    let mut points = 64usize;
    let mut previous = trapezoid(z, config, points);
    let mut estimate = f64::INFINITY;
    loop {
        points *= 2;
        if points > options.quad_points {
            return Err(GreensError::NonConvergent { z, estimate });
        }
        let current = trapezoid(z, config, points);
        estimate = (current - previous).norm();
        if estimate <= options.quad_tol {
            return Ok(current);
        }
        previous = current;
    }
}
