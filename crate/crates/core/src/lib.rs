//! Chiral random matrix ensembles for the three Dyson indices, Monte Carlo
//! estimates of characteristic-polynomial ratios, and their low-dimensional
//! superspace representations.
//!
//! The crate is organised bottom-up:
//!
//! * [`superalg`]: exact Grassmann algebra and supermatrices.
//! * [`quadrature`]: Gauss rules, periodic trapezoid, node doubling.
//! * [`ensembles`]: samplers and log-densities of the rectangular matrix `W`.
//! * [`ordinary_mc`]: Monte Carlo estimators in ordinary matrix space.
//! * [`superspace`]: superfunctions and coset integrals for β = 2.
//! * [`verify`]: oracles, calibration and the comparison scenarios.

pub mod dyson;
pub mod ensembles;
pub mod error;
pub mod linalg;
pub mod ordinary_mc;
pub mod quadrature;
pub mod sources;
pub mod special;
pub mod superalg;
pub mod superspace;
pub mod verify;

pub use dyson::DysonIndex;
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use sources::SourcePack;
