//! Exact point counts modulo prime powers, Igusa zeta truncations and p-adic
//! exponential sums for polynomials with rational coefficients.

pub mod arith;
pub mod corpus;
pub mod counting;
pub mod error;
pub mod expsum;
pub mod json;
pub mod localring;
pub mod oscillation;
pub mod polyring;
pub mod zeta;

pub use error::{Error, Result};
