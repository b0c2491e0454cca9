//! Linewidth of B across the n = 1 replica edge, converged in the truncation.

use floquet_remote::dispersion::{converge_truncation, DispersionVariant, SolverOptions};
use floquet_remote::model::ModelConfig;

fn main() {
    let options = SolverOptions::default();
    println!("{:>8} {:>16} {:>13} {:>3} {:>5}", "omega", "Re z", "gamma_B", "N", "iters");
    for omega in [2.3000, 2.3010, 2.3020, 2.3025, 2.3040] {
        let config = ModelConfig::replica_edge(omega, 1.081978).validate().expect("valid model");
        match converge_truncation(DispersionVariant::ScalarB0Exact, None, &config, 1e-12, &options) {
            Ok((t, pole)) => println!(
                "{omega:>8.4} {:>16.12} {:>13.5e} {:>3} {:>5}",
                pole.z.re, pole.gamma, t.channels, pole.iterations
            ),
            Err(e) => println!("{omega:>8.4} {e}"),
        }
    }
}
