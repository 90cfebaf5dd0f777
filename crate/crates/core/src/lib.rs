pub mod charts;
pub mod conventions;
pub mod error;
pub mod fock;
pub mod gates;
pub mod holonomy;
pub mod kick;
pub mod ledger;
pub mod linalg;
pub mod optics;
pub mod quadrature;
pub mod stokes;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
