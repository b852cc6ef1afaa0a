//! Harmonic analysis on the Heisenberg group `H^n`.

pub mod error;
pub mod fit;
pub mod harness;
pub mod hgroup;
pub mod measure;
pub mod operators;
pub mod potential;
pub mod quad;
pub mod semigroup;
pub mod spaces;

pub use error::{Error, Result};
pub use hgroup::{HBall, HPoint};
