//! At the replica edge only B finds an open channel: A survives, B leaks.
//!
//!     cargo run --release --example selective_dissipation -- [t_max]

use floquet_remote::evolution::{evolve, EvolutionConfig};
use floquet_remote::model::{classify_energy, Level, ModelConfig};
use floquet_remote::repro::level_pole;

fn main() {
    let t_max: f64 = std::env::args().nth(1).map_or(4000.0, |s| s.parse().expect("t_max"));
    let config = ModelConfig::replica_edge(2.3025, 1.081978).validate().unwrap();
    let (a, b) = rayon::join(
        || evolve(&config, &EvolutionConfig { t_max, ..EvolutionConfig::desk(Level::A) }),
        || evolve(&config, &EvolutionConfig { t_max, ..EvolutionConfig::desk(Level::B) }),
    );
    let (a, b) = (a.unwrap(), b.unwrap());
    for level in [Level::A, Level::B] {
        let pole = level_pole(&config, level, 1e-12).unwrap();
        // Classified at the dressed energy; the bare eB lies just below the edge.
        let place = classify_energy(&config, level, pole.z.re, 4);
        println!("gamma_{level} = {:.4e}  ({})", pole.gamma, place.describe());
    }
    println!("P_A({t_max}) = {:.6}", a.final_survival());
    println!("P_B({t_max}) = {:.6}", b.final_survival());
}
