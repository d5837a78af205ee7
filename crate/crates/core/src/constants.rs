//! Physical constants used throughout the crate (CODATA 2018 exact or
//! recommended values).

/// Label written into every output header.
pub const CONSTANTS_VERSION: &str = "CODATA-2018";

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// Standard gravitational acceleration used for the disk weight, m/s².
pub const G_ACCEL: f64 = 9.81;

/// Viscosity of ethanol at room temperature, Pa·s.
pub const ETHANOL_VISCOSITY: f64 = 1.2e-3;
