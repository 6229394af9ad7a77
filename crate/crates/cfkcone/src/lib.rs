//! Knot Floer complexes over `F2[U,V]` built from filtered mapping cones of
//! staircase complexes, with reduction, truncation and invariant extraction.

pub mod algebra;
pub mod cone;
pub mod error;
pub mod export;
pub mod filtered;
pub mod gf2;
pub mod invariants;
pub mod json;
pub mod obstruction;
pub mod reduction;
pub mod snf;
pub mod staircase;

pub use error::{Error, Result};
