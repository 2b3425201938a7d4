//! Synthetic systems used by the experiments: a robot on a grid (for
//! observational determinism and opacity) and a concurrent queue.

pub mod domains;
pub mod queue;
pub mod robot;
