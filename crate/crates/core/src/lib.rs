//! Complex quasienergies and survival probabilities of two discrete levels
//! side-coupled to a tight-binding chain, one of them periodically driven.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dispersion;
pub mod evolution;
pub mod lattice_greens;
pub mod model;
pub mod output;
pub mod repro;
pub mod selfenergy;
