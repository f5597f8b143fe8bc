//! Scenarios, field solvers on periodic grids, file formats and the run
//! harness around the `ccsl-core` transport kernels.

pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod scenarios;
pub mod spectral;

pub use error::RunError;
