//! Fast Jacobi polynomial transforms and Gauss-Jacobi quadrature built on
//! nonoscillatory phase functions.

mod dd;
mod error;
mod linalg;

pub mod chebgrid;
pub mod fft;
pub mod jacobi_ref;
pub mod jactransform;
pub mod lowrank;
pub mod nufft;
pub mod phasefn;
pub mod quadrule;
pub mod special;
pub mod vecio;

pub use error::{Error, Result};
