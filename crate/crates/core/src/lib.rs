//! Dynamical tunnelling of a light-driven quartic nano-mechanical oscillator.
//!
//! * [`params`]: laboratory parameters, adiabatic cavity mean field and the
//!   map to the dimensionless (κ, ε, ħ_eff) oscillator.
//! * [`classical`]: symplectic integration, stroboscopic sections and
//!   period-one islands.
//! * [`quantum`]: split-step propagation, the one-period propagator and its
//!   parity-resolved Floquet spectrum.
//! * [`analysis`]: Husimi maps, tunnelling pairs and tunnelling periods.
//! * [`io`]: CSV/JSON writers for all of the above.

pub mod analysis;
pub mod classical;
pub mod error;
pub mod io;
pub mod params;
pub mod quantum;
pub mod splitting;

pub use error::{Error, Result};
pub use splitting::Scheme;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
