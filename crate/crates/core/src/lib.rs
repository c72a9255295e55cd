#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod experiment;
pub mod noise;
pub mod protocol;
pub mod pulse;
pub mod quantum;
pub mod rng;

pub use error::{Error, Result};
