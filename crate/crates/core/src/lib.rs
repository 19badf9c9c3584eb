//! Computational tools for primitive substitutions and their fixed points.

mod bigstr;
pub mod cli;
pub mod coincidence;
pub mod error;
pub mod ipcentral;
pub mod numeration;
pub mod points;
pub mod spectral;
pub mod strand;
pub mod word;

pub use error::{Error, Result};
