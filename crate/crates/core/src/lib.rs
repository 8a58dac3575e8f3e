//! Circle-method toolkit for aN(x) + bN(y) = z^n over a number field k,
//! where N is the norm form of a relative extension K/k.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod circle;
pub mod error;
pub mod fixtures;
pub mod hl;
pub mod lattice;
pub mod local;
pub mod numeric;
pub mod selftest;

pub use error::{Error, Result};
