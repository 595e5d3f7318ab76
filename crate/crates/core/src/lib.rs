#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod accumfn;
pub mod baselines;
pub mod density;
pub mod dosage;
pub mod error;
pub mod piecewise;
pub mod power;
pub mod quad;
pub mod rng;
pub mod seqtest;
pub mod simlab;
pub mod special;
pub mod stats;
pub mod welch;

pub use accumfn::{AccumulationSpec, Family};
pub use density::AlternativeDensity;
pub use error::{Error, Result};
pub use piecewise::{Piece, PiecewiseConstant};
