//! Closed-form channel Green's function against direct k-space quadrature,
//! and the jump across the band cut.

use floquet_remote::lattice_greens::{zeta0, zeta0_quadrature, GreensOptions, Sheet};
use floquet_remote::model::ModelConfig;
use num_complex::Complex64;

fn main() {
    let cfg = ModelConfig::replica_edge(2.3025, 1.081978);
    let opts = GreensOptions::default();
    for (re, im) in [(0.3, 1e-3), (-0.99, 0.01), (1.5, 0.2), (0.0, 2.0)] {
        let z = Complex64::new(re, im);
        let closed = zeta0(z, Sheet::Physical, &cfg).unwrap();
        let quad = zeta0_quadrature(z, &cfg, &opts).unwrap();
        println!("z = {z:.3}: closed {closed:.10}  |diff| {:.1e}", (closed - quad).norm());
    }

    // Continuing through the cut onto the second sheet keeps the value smooth.
    let e = 0.4;
    let above = zeta0(Complex64::new(e, 1e-9), Sheet::Physical, &cfg).unwrap();
    let below_phys = zeta0(Complex64::new(e, -1e-9), Sheet::Physical, &cfg).unwrap();
    let below_second = zeta0(Complex64::new(e, -1e-9), Sheet::Second, &cfg).unwrap();
    println!("E = {e}: jump {:.6} (expect {:.6}i)", above - below_phys, -2.0 / (1.0f64 - e * e).sqrt());
    println!("second-sheet mismatch {:.1e}", (above - below_second).norm());
}
