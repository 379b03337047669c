//! Exponent predictions, exact heights and exhaustive point counts for
//! integral points of bounded height on wonderful compactifications of
//! split adjoint groups, with brute-force verification on `PGL_n(Q)`.

pub mod cli;
pub mod config;
pub mod diagram_action;
pub mod enumerate;
pub mod error;
pub mod exponents;
pub mod fit;
pub mod heights;
pub mod picard;
pub mod place;
pub mod root_system;
pub mod zeta;

pub use error::{Error, Result};
