//! gamma_B against g^6 and against J0^2 J1^2, with the frequency tracking the
//! replica edge as the level shift changes.

use floquet_remote::analysis::scaling_audit;
use floquet_remote::dispersion::SolverOptions;
use floquet_remote::model::ModelConfig;

fn main() {
    let base = ModelConfig::replica_edge(2.3025, 1.081978);
    let chi: Vec<f64> = (0..=6).map(|i| 0.7 + 0.1 * f64::from(i)).collect();
    let report = scaling_audit(&chi, &[0.05, 0.025, 0.0125], &base, &SolverOptions::default()).unwrap();
    for p in &report.chi_points {
        println!("chi {:.2}: gamma {:.4e}  gamma/(J0 J1)^2 {:.4e}", p.chi, p.gamma, p.gamma / p.bessel_weight);
    }
    println!("spread {:.3}", report.ratio_spread);
    for p in &report.coupling_points {
        println!("g {:<7} omega {:.6}  gamma {:.4e}", p.g, p.omega, p.gamma);
    }
    println!("slope {:.3}", report.coupling_slope);
}
