//! File formats, stream input, timeouts and scenario experiments around
//! the `hypermon-core` monitor. The `hypermon` binary is a thin layer over
//! this library.

pub mod bench;
pub mod cputime;
pub mod driver;
pub mod error;
pub mod io;
pub mod setup;

pub use driver::{Input, Outcome, Report};
pub use error::{Error, Result};
