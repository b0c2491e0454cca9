//! Tuning chi to the first zero of J0 cuts B off from its replica channel,
//! while the detuned drive opens one for A.
//!
//!     cargo run --release --example channel_switching -- [t_max]

use floquet_remote::evolution::{evolve, EvolutionConfig};
use floquet_remote::model::{Level, ModelConfig};
use floquet_remote::repro::level_pole;
use floquet_remote::selfenergy::bessel_j;

fn main() {
    let t_max: f64 = std::env::args().nth(1).map_or(2000.0, |s| s.parse().expect("t_max"));
    let chi = 2.404826;
    println!("J0({chi}) = {:.2e}", bessel_j(0, chi));
    let config = ModelConfig::replica_edge(2.2, chi).validate().unwrap();
    for level in [Level::A, Level::B] {
        let pole = level_pole(&config, level, 1e-12).unwrap();
        println!("{level}: z = {:.9}  gamma = {:.4e}", pole.z, pole.gamma);
    }
    let (a, b) = rayon::join(
        || evolve(&config, &EvolutionConfig { t_max, ..EvolutionConfig::desk(Level::A) }),
        || evolve(&config, &EvolutionConfig { t_max, ..EvolutionConfig::desk(Level::B) }),
    );
    let (a, b) = (a.unwrap(), b.unwrap());
    println!("P_A({t_max}) = {:.3e}", a.final_survival());
    println!("min P_B = {:.6}", b.min_survival());
}
