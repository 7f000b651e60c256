//! Klein-Gordon fields in first quantization: lattice and plane-wave representations,
//! the `a`-family of inner products, conserved currents, localized states and limits.

pub mod amplitude;
pub mod bessel;
pub mod boost;
pub mod currents;
pub mod em;
pub mod error;
pub mod field;
pub mod gauge;
pub mod inner;
pub mod io;
pub mod lattice;
pub mod limits;
pub mod localization;
pub mod packets;
pub mod params;
pub mod planewave;
pub mod quadrature;
pub mod random;
pub mod verify;

pub use boost::{Boost, BoostMode};
pub use error::{KgError, Result};
pub use field::LatticeField;
pub use lattice::{Grid, MomentumLattice, C64};
pub use params::ModelParams;
pub use planewave::{PlaneMode, PlaneWaveField, Sector};
