//! Nahm data on an interval and the D₂ ALF family of hyperkähler four-manifolds.

pub mod algebra;
pub mod connection;
pub mod duy;
pub mod equivariant;
pub mod error;
pub mod grid;
pub mod moduli;
pub mod nahm;
pub mod ops;
pub mod periods;
pub mod rg;
pub mod sample;
pub mod verify;

pub use error::{Error, Result};
