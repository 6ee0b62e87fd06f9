//! Frequency-response simulation of a single-bus grid with a de-loaded
//! wind plant, thermal and hydro units.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aero;
pub mod control;
pub mod curves;
pub mod grid;
mod numeric;
pub mod engine;
pub mod io;
