//! Numerical laboratory for the semilinear damped wave equation
//! `u_tt - Δu + u_t = |u|^p` with initial data of negative Sobolev order.

// `!(x > 0.0)` guards are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod exponents;
pub mod propagator;
pub mod radial;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
