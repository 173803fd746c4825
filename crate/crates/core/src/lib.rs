//! Masked Gaussian elimination over GF(2^w): gadgets, solver, cost model and
//! probing checks.

#![allow(clippy::needless_range_loop)]

pub mod cost;
pub mod error;
pub mod gf;
pub mod linalg;
pub mod masking;
pub mod probe;
pub mod rowops;

pub use error::{Error, Result};
pub use gf::{Elem, FieldSpec};
