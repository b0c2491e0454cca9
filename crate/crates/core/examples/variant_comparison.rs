//! The B-pole from the full determinant, the exact scalar reduction and its
//! coupling expansion, at a fixed truncation.

use floquet_remote::dispersion::{find_pole, DispersionVariant, SolverOptions};
use floquet_remote::model::ModelConfig;
use floquet_remote::selfenergy::FloquetTruncation;

fn main() {
    for g_a in [0.05, 0.025] {
        let base = ModelConfig::replica_edge(2.3025, 1.081978);
        let config = base.with_couplings(g_a, base.g_b).validate().unwrap();
        let truncation = FloquetTruncation::auto(6, config.chi());
        println!("gA = {g_a}");
        let mut exact = None;
        for variant in
            [DispersionVariant::ScalarB0Exact, DispersionVariant::ScalarB0Expanded, DispersionVariant::DeterminantB]
        {
            let pole = find_pole(variant, None, &config, truncation, &SolverOptions::default()).unwrap();
            let z0 = *exact.get_or_insert(pole.z);
            println!("  {:<18} z = {:.12}  |dz| = {:.2e}", variant.name(), pole.z, (pole.z - z0).norm());
        }
    }
}
