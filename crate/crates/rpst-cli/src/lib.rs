//! Simulation harness, file formats and validation suite for the private
//! rank-test toolkit. The `rpst` binary is a thin wrapper over this crate.

pub mod io;
pub mod sim;
pub mod sweep;
pub mod validate;
