//! Solution measures of linear-form systems over Z/N, Gowers uniformity norms,
//! extremal set search, and exact polynomial sequences on filtered nilmanifolds.

pub mod arith;
pub mod counting;
pub mod extremal;
pub mod error;
pub mod forms;
pub mod fourier;
pub mod gowers;
pub mod harness;
pub mod io;
pub mod nil;
pub mod periodic;
pub mod snf;

pub use error::{Error, Result};
