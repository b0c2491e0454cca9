//! P_B(t) at the replica edge compared with the pole linewidth.
//!
//!     cargo run --release --example survival_fig3 -- [t_max]
//!
//! The default horizon is short; 20000 takes several minutes.

use floquet_remote::analysis::{compare_pole_vs_time, FitWindow};
use floquet_remote::dispersion::{converge_truncation, DispersionVariant, SolverOptions};
use floquet_remote::evolution::{evolve, EvolutionConfig};
use floquet_remote::model::{Level, ModelConfig};

fn main() {
    let t_max: f64 = std::env::args().nth(1).map_or(2000.0, |s| s.parse().expect("t_max"));
    let config = ModelConfig::replica_edge(2.3025, 1.081978).validate().unwrap();
    let (_, pole) =
        converge_truncation(DispersionVariant::ScalarB0Exact, None, &config, 1e-12, &SolverOptions::default()).unwrap();
    let evo = EvolutionConfig { t_max, ..EvolutionConfig::desk(Level::B) };
    let series = evolve(&config, &evo).unwrap();
    for k in 0..=10 {
        let t = t_max * f64::from(k) / 10.0;
        let p = series.survival_at(t).unwrap();
        println!("t = {t:>8.1}  P_B = {p:.6}  exp(-2 gamma t) = {:.6}", (-2.0 * pole.gamma * t).exp());
    }
    match compare_pole_vs_time(&pole, &series, FitWindow::default_for(t_max)) {
        Ok(cmp) => println!("{cmp}"),
        Err(e) => println!("fit: {e}"),
    }
}
