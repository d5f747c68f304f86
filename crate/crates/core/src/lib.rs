#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod embedding;
pub mod error;
pub mod gait;
pub mod model;
pub mod navsim;
pub mod nn;
pub mod proxemics;
pub(crate) mod rng;

pub use error::{Error, Result};
