//! A one-dimensional laboratory for Colombeau-type generalized functions.
//!
//! Representatives are evaluated on smoothing kernels, their seminorms are
//! swept over families of scaled mollifiers, and the resulting rates are used
//! to witness moderateness or to refute negligibility.

pub mod asymptotics;
pub mod cli;
pub mod distribution;
pub mod error;
pub mod exprdsl;
pub mod funcspace;
pub mod genfunc;
pub mod mollifier;
pub mod quadrature;
pub mod seminorm;
pub mod specialmap;

pub use error::{Error, Result};
