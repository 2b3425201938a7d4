//! Runtime verification of hyperproperties over finite traces.
//!
//! The crate is `no_std` (with `alloc`) and contains everything that does not
//! need an operating system: the trace model, the formula language with its
//! parser, a brute-force reference evaluator, the symbolic register automata
//! used to decide prefix atoms incrementally, the quantifier-instantiation
//! monitor, built-in generator functions, and the synthetic scenario systems.
//!
//! File formats, the command-line tool and wall-clock timeouts live in the
//! companion `hypermon` crate.

#![no_std]

extern crate alloc;

pub mod bdd;
pub mod formula;
pub mod generators;
mod hash;
pub mod monitor;
pub mod oracle;
pub mod scenarios;
pub mod trace;
pub mod transducer;

pub use formula::{Formula, TraceFormula};
pub use monitor::{Monitor, MonitorConfig, Verdict};
pub use trace::{DataDomain, Observation, Trace, Valuation, Value};
