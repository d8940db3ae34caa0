//! Certified equilibrium states for rational maps of the Riemann sphere
//! and for expanding Thurston maps given by two-tile subdivision rules.

pub mod error;
pub mod numerics;

pub use error::{Error, Result};
pub mod measure;
pub mod sphere;
pub mod ratmap;
pub mod thurston;
pub mod thermo;
pub mod verify;
