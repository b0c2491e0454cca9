//! Loading a flat key = value run file on top of a preset.

use floquet_remote::config::{Preset, RunConfig};
use floquet_remote::repro::level_pole;

const RUN: &str = "
# off the edge: B is pushed out of the n = 1 replica
omega = 2.3040
chi = 1.081978
initial = B
t_max = 500
";

fn main() {
    let preset: Preset = "fig3".parse().unwrap();
    let run = preset.apply(RunConfig::default()).apply_str(RUN).expect("config parses");
    let config = run.validated_model().unwrap();
    println!("omega {}  chi {:.6}  t_max {}", config.omega, config.chi(), run.evolution.t_max);
    let pole = level_pole(&config, run.evolution.initial, run.solver.truncation_tol).unwrap();
    println!("B pole {:.10}  gamma {:.2e}", pole.z, pole.gamma);

    match RunConfig::default().apply_str("omega = 2.3\nfrequency = 2\n") {
        Ok(_) => println!("unexpected: accepted"),
        Err(e) => println!("rejected: {e}"),
    }
}
