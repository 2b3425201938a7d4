//! Events, traces, observations and the projections that turn traces into words.

mod domain;
mod observation;
mod value;
pub mod word;

pub use domain::{DataDomain, ProjId, ProjectionFn, UnknownProjection};
pub use observation::{Delta, Observation, Trace, TraceId, UpdateError};
pub use value::{Valuation, Value};

/// A finite word over values; the result of projecting a trace.
pub type Word = alloc::vec::Vec<Value>;
