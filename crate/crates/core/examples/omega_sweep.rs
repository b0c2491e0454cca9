//! Linewidth of B as the drive frequency pushes the level out of the replica.

use floquet_remote::analysis::{parse_grid, sweep, SweepAxis, SweepOptions};
use floquet_remote::model::ModelConfig;

fn main() {
    let grid = parse_grid("2.2990:2.3050:0.0005").unwrap();
    let base = ModelConfig::replica_edge(2.3025, 1.081978);
    let rows = sweep(SweepAxis::Omega, &grid, &base, &SweepOptions::default());
    for row in rows {
        let gamma = row.gamma_pole.map_or("-".into(), |g| format!("{g:.4e}"));
        println!("{:.4}  gamma_B {gamma:>11}  in replica: {}  {}", row.omega, row.replica_flag_b, row.status);
    }
}
