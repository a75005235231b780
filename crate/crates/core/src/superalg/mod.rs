//! Exact Grassmann algebra and supermatrix kernel.
//!
//! Elements are sparse maps from monomials (bit sets of generators) to
//! complex coefficients. Everything here is pure and immutable, so values
//! can be shared across threads freely.

mod grassmann;
mod rect;
mod supermatrix;

pub use grassmann::{
    berezin, gmul, lift_scalar, power_derivatives, GrassmannElement, MAX_GENERATORS,
};
pub use rect::{conjugate, random_even, random_invertible, random_odd, RectSuperMatrix};
pub use supermatrix::{even_det, even_inverse, SuperMatrix};
