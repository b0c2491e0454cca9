//! End-to-end acceptance criteria. Each test prints one `criterion N: PASS|FAIL`
//! line (written straight to stdout so it survives output capture) and then
//! asserts.
//!
//! The trajectory criteria (2-4) run desk-scale chains and take several
//! minutes each on one core; runs are shared between criteria.

use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use floquet_remote::analysis::{fit_decay, scaling_audit, FitMethod, FitWindow};
use floquet_remote::dispersion::{converge_truncation, find_pole, DispersionVariant, Pole, SolverOptions};
use floquet_remote::evolution::{build_cap, evolve, EvolutionConfig, Propagator, SurvivalSeries, WavefunctionState};
use floquet_remote::lattice_greens::{zeta0, zeta0_quadrature, GreensOptions, Sheet};
use floquet_remote::model::{Level, ModelConfig, ValidatedConfig};
use floquet_remote::selfenergy::FloquetTruncation;

const CHI_STAR: f64 = 1.081978;
const CHI_J0_ZERO: f64 = 2.404826;

fn report(n: u32, pass: bool, summary: &str, details: &[String]) {
    let mut out = std::io::stdout().lock();
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "criterion {n}: {verdict} - {summary}");
    for line in details {
        let _ = writeln!(out, "    {line}");
    }
    let _ = out.flush();
}

fn edge(omega: f64, chi: f64) -> ValidatedConfig {
    ModelConfig::replica_edge(omega, chi).validate().unwrap()
}

fn converged(variant: DispersionVariant, config: &ValidatedConfig) -> Pole {
    converge_truncation(variant, None, config, 1e-12, &SolverOptions::default()).unwrap().1
}

fn desk_run(omega: f64, chi: f64, level: Level, t_max: f64) -> SurvivalSeries {
    let evo = EvolutionConfig { t_max, ..EvolutionConfig::desk(level) };
    evolve(&edge(omega, chi), &evo).unwrap()
}

static EDGE_B: OnceLock<SurvivalSeries> = OnceLock::new();
static EDGE_A: OnceLock<SurvivalSeries> = OnceLock::new();
static SWITCH_B: OnceLock<SurvivalSeries> = OnceLock::new();
static SWITCH_A: OnceLock<SurvivalSeries> = OnceLock::new();

fn edge_b() -> &'static SurvivalSeries {
    EDGE_B.get_or_init(|| desk_run(2.3025, CHI_STAR, Level::B, 2e4))
}

#[test]
fn criterion_1_gamma_b_table() {
    let table = [(2.3000, 1.2133e-5), (2.3010, 1.4645e-5), (2.3020, 1.9906e-5), (2.3025, 2.6346e-5)];
    let mut pass = true;
    let mut details = Vec::new();
    let mut slowest = 0.0f64;
    for (omega, reference) in table {
        let start = Instant::now();
        let pole = converged(DispersionVariant::ScalarB0Exact, &edge(omega, CHI_STAR));
        slowest = slowest.max(start.elapsed().as_secs_f64());
        let rel = (pole.gamma / reference - 1.0).abs();
        pass &= rel < 0.02;
        details.push(format!(
            "omega {omega:.4}: gamma {:.5e} vs {reference:.4e} (rel {rel:.2e}, N = {})",
            pole.gamma, pole.truncation.channels
        ));
    }
    let start = Instant::now();
    let closed = converged(DispersionVariant::ScalarB0Exact, &edge(2.3040, CHI_STAR));
    slowest = slowest.max(start.elapsed().as_secs_f64());
    pass &= closed.gamma < 1e-9 && slowest < 1.0;
    details.push(format!("omega 2.3040: gamma {:.3e} (want < 1e-9)", closed.gamma));
    details.push(format!("slowest pole {slowest:.3} s (want < 1 s)"));
    report(1, pass, "gamma_B table within 2%, closed channel real", &details);
    assert!(pass);
}

#[test]
fn criterion_2_pole_matches_time_domain() {
    let series = edge_b();
    let config = edge(2.3025, CHI_STAR);
    let pole = converged(DispersionVariant::ScalarB0Exact, &config);
    let window = FitWindow { t_lo: 2000.0, t_hi: 2e4 };
    let fit = fit_decay(series, window, FitMethod::Stroboscopic).unwrap();
    let rel = (fit.gamma_fit / pole.gamma - 1.0).abs();
    let pass = rel < 0.05 && fit.r_squared > 0.999;
    let full = converged(DispersionVariant::DeterminantB, &config);
    let details = vec![
        format!("gamma_fit {:.5e} over {} stroboscopic samples, R^2 {:.6}", fit.gamma_fit, fit.n_points, fit.r_squared),
        format!("scalar-b0-exact pole {:.5e}: rel {rel:.3e} (want < 0.05)", pole.gamma),
        format!(
            "determinant-b pole {:.5e}: rel {:.3e} (reference only)",
            full.gamma,
            (fit.gamma_fit / full.gamma - 1.0).abs()
        ),
    ];
    report(2, pass, "stroboscopic fit vs pole at omega = 2.3025", &details);
    assert!(pass);
}

#[test]
fn criterion_3_selective_remote_dissipation() {
    let b = edge_b();
    let a = EDGE_A.get_or_init(|| desk_run(2.3025, CHI_STAR, Level::A, 2e4));
    let (pa, pb) = (a.final_survival(), b.final_survival());
    let pass = pa >= 0.90 && (0.30..=0.40).contains(&pb);
    let details =
        vec![format!("P_A(2e4) = {pa:.6} (want >= 0.90)"), format!("P_B(2e4) = {pb:.6} (want in [0.30, 0.40])")];
    report(3, pass, "A survives while B decays at omega = 2.3025", &details);
    assert!(pass);
}

#[test]
fn criterion_4_channel_switching() {
    let b = SWITCH_B.get_or_init(|| desk_run(2.2, CHI_J0_ZERO, Level::B, 2e4));
    // Only P_A(2000) is checked; the trajectory prefix is identical to a full run.
    let a = SWITCH_A.get_or_init(|| desk_run(2.2, CHI_J0_ZERO, Level::A, 2000.0));
    let pa = a.survival_at(2000.0).unwrap();
    let pb = b.min_survival();
    let pass = pb >= 0.98 && pa < 0.05;
    let details = vec![format!("min P_B = {pb:.6} (want >= 0.98)"), format!("P_A(2000) = {pa:.3e} (want < 0.05)")];
    report(4, pass, "B protected, A decays at omega = 2.2, chi = 2.404826", &details);
    assert!(pass);
}

#[test]
fn criterion_5_greens_oracle() {
    let cfg = ModelConfig::replica_edge(2.3025, CHI_STAR);
    let opts = GreensOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_517);
    let mut worst_quad = 0.0f64;
    for _ in 0..200 {
        let re = rng.gen_range(-2.5..2.5);
        let im = 10f64.powf(rng.gen_range(-3.0..2f64.log10()));
        let z = Complex64::new(re, im);
        let closed = zeta0(z, Sheet::Physical, &cfg).unwrap();
        let quad = zeta0_quadrature(z, &cfg, &opts).unwrap();
        worst_quad = worst_quad.max((closed - quad).norm());
    }
    let mut worst_cut = 0.0f64;
    for i in 0..20 {
        let e = -0.95 + 1.9 * f64::from(i) / 19.0;
        let above = zeta0(Complex64::new(e, 1e-12), Sheet::Physical, &cfg).unwrap();
        let below = zeta0(Complex64::new(e, -1e-12), Sheet::Physical, &cfg).unwrap();
        let expected = Complex64::new(0.0, -2.0 / (1.0 - e * e).sqrt());
        worst_cut = worst_cut.max((above - below - expected).norm());
    }
    let pass = worst_quad < 1e-10 && worst_cut < 1e-8;
    let details = vec![
        format!("200 random points: max |closed - quadrature| = {worst_quad:.2e} (want < 1e-10)"),
        format!("20 energies: max cut error = {worst_cut:.2e} (want < 1e-8)"),
    ];
    report(5, pass, "closed form vs quadrature and cut discontinuity", &details);
    assert!(pass);
}

fn pole_at(variant: DispersionVariant, config: &ValidatedConfig, channels: usize) -> Pole {
    let truncation = FloquetTruncation::auto(channels, config.chi());
    find_pole(variant, None, config, truncation, &SolverOptions::default()).unwrap()
}

#[test]
fn criterion_6_variant_consistency() {
    let channels = 6;
    let config = edge(2.3025, CHI_STAR);
    let exact = pole_at(DispersionVariant::ScalarB0Exact, &config, channels);
    let det = pole_at(DispersionVariant::DeterminantB, &config, channels);
    let expanded = pole_at(DispersionVariant::ScalarB0Expanded, &config, channels);
    let det_gap = (det.z - exact.z).norm();
    let exp_gap = (expanded.z - exact.z).norm();

    let half = ModelConfig { g_a: 0.025, ..*config }.validate().unwrap();
    let exact_half = pole_at(DispersionVariant::ScalarB0Exact, &half, channels);
    let expanded_half = pole_at(DispersionVariant::ScalarB0Expanded, &half, channels);
    let exp_gap_half = (expanded_half.z - exact_half.z).norm();
    let ratio = exp_gap / exp_gap_half;

    let det_ok = det_gap < 1e-6;
    let exp_ok = exp_gap < 1e-8;
    let ratio_ok = (48.0..=80.0).contains(&ratio);
    let pass = det_ok && exp_ok && ratio_ok;
    let details = vec![
        format!("|z_det - z_exact| = {det_gap:.3e} (want < 1e-6)"),
        format!("|z_expanded - z_exact| = {exp_gap:.3e} at gA = 0.05 (want < 1e-8)"),
        format!("halving gA shrinks that gap {ratio:.1}x (want about 64, accepted 48..80)"),
    ];
    report(6, pass, "determinant / scalar / expanded roots agree", &details);
    assert!(pass);
}

#[test]
fn criterion_7_scaling_laws() {
    let base = ModelConfig::replica_edge(2.3025, CHI_STAR);
    let chi_grid: Vec<f64> = (0..=12).map(|i| 0.7 + 0.05 * f64::from(i)).collect();
    let audit = scaling_audit(&chi_grid, &[0.05, 0.025, 0.0125], &base, &SolverOptions::default()).unwrap();
    let slope_ok = (audit.coupling_slope - 6.0).abs() <= 0.3;
    let spread_ok = audit.ratio_spread < 0.10;
    let pass = slope_ok && spread_ok;
    let mut details = vec![
        format!("log-log slope {:.4} (want 6.0 +- 0.3)", audit.coupling_slope),
        format!("gamma / (J0^2 J1^2) spread {:.4} over chi in [0.7, 1.3] (want < 0.10)", audit.ratio_spread),
    ];
    for p in &audit.coupling_points {
        details.push(format!("g = {}: omega {:.6}, gamma {:.4e}", p.g, p.omega, p.gamma));
    }
    report(7, pass, "gamma_B ~ g^6 and ~ J0^2 J1^2", &details);
    assert!(pass);
}

fn run_a(model: &ModelConfig, half_length: usize, dt: f64, t_end: f64) -> WavefunctionState {
    let evo = EvolutionConfig {
        half_length,
        cap_width: half_length / 2,
        dt,
        t_max: t_end,
        ..EvolutionConfig::desk(Level::A)
    };
    let cap = build_cap(&evo);
    let mut prop = Propagator::new(model, &cap, &WavefunctionState::prepared(half_length, Level::A));
    let steps = (t_end / dt).round() as usize;
    for k in 0..steps {
        prop.step(k as f64 * dt, dt);
    }
    prop.state(t_end)
}

#[test]
fn criterion_8_integrator_hygiene() {
    let model = edge(2.3025, CHI_STAR);

    let free = EvolutionConfig {
        half_length: 200,
        cap_width: 100,
        gamma0: 0.0,
        t_max: 100.0,
        ..EvolutionConfig::desk(Level::B)
    };
    let drift = evolve(&model, &free).unwrap().norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);

    let switch = edge(2.2, CHI_J0_ZERO);
    let absorbing = EvolutionConfig {
        half_length: 300,
        cap_width: 180,
        t_max: 2000.0,
        sample_stride: Some(50),
        ..EvolutionConfig::desk(Level::A)
    };
    let norms = evolve(&switch, &absorbing).unwrap().norm;
    let worst_rise = norms.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let monotone = worst_rise <= 1e-9 * 50.0;

    let coarse = EvolutionConfig { half_length: 300, cap_width: 180, t_max: 2000.0, ..EvolutionConfig::desk(Level::B) };
    let fine = EvolutionConfig { dt: coarse.dt / 2.0, ..coarse };
    let halving =
        (evolve(&model, &coarse).unwrap().final_survival() - evolve(&model, &fine).unwrap().final_survival()).abs();

    let probe = ModelConfig { g_a: 0.3, g_b: 0.3, ..*edge(2.2, CHI_STAR) };
    let reference = run_a(&probe, 20, 0.1 / 64.0, 2.0);
    let err = |dt: f64| {
        let s = run_a(&probe, 20, dt, 2.0);
        s.amplitudes.iter().zip(&reference.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    };
    let ratio = err(0.1) / err(0.05);

    let pass = drift < 1e-8 && monotone && halving < 1e-6 && (ratio - 16.0).abs() <= 2.0;
    let details = vec![
        format!("no CAP, M = 200, t = 100: max |norm - 1| = {drift:.2e} (want < 1e-8)"),
        format!("with CAP: largest norm rise between samples {worst_rise:.2e} (want <= 5e-8)"),
        format!("dt halving: |dP_B(t_max)| = {halving:.2e} (want < 1e-6)"),
        format!("RK4 error ratio {ratio:.2} (want 16 +- 2)"),
    ];
    report(8, pass, "norm, monotonicity, dt convergence, order 4", &details);
    assert!(pass);
}
