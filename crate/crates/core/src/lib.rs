//! Discrete Bessel functions of the forward and backward difference
//! equations on the integers, with the tools used to check them.

pub mod bessel;
pub mod error;
pub mod hyper;
pub mod io;
pub mod laplace;
pub mod numeric;
pub mod oracle;
pub mod verify;
pub mod wave;

pub use error::{Error, Result};
pub use numeric::{Residual, Scaled};
