pub mod barash;
pub mod constants;
pub mod materials;
pub mod observables;
pub mod quadrature;
pub mod scenario;
pub mod experiment;
pub mod nonretarded;
#[cfg(feature = "cli")]
pub mod cli;
