#![allow(non_snake_case, clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod config;
pub mod constants;
pub mod error;
pub mod evolve;
pub mod gates;
pub mod model;
pub mod motion;
pub mod numerics;
pub mod run;
pub mod scaling;

pub use error::{Error, Result};
