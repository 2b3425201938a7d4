//! Generators over robot runs: re-executions with fresh secrets and runs
//! with the same public areas.

use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{GenError, GenInstance, Generator, OnTermination};
use crate::scenarios::robot::{OdSystem, OpacitySystem};
use crate::trace::Trace;

/// `n` runs of the system on the inputs of the argument, with random
/// secret targets. Available as soon as the argument's input word is
/// complete.
#[derive(Clone, Copy, Debug)]
pub struct Samples {
    pub n: usize,
    pub system: OdSystem,
    pub seed: u64,
}

struct SamplesInstance(Samples);

impl Generator for Samples {
    fn arity(&self) -> Option<usize> {
        Some(1)
    }

    fn instance(&self) -> Box<dyn GenInstance> {
        Box::new(SamplesInstance(*self))
    }
}

impl GenInstance for SamplesInstance {
    fn advance(&mut self, args: &[&Trace], out: &mut Vec<Trace>) -> Result<bool, GenError> {
        let s = &self.0;
        match s.system.samples(args[0], s.n, s.seed) {
            Some(runs) => {
                out.extend(runs.into_iter().map(|evs| Trace::complete("", evs)));
                Ok(true)
            }
            None => Ok(args[0].is_terminated()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqAreaMode {
    /// All runs with the same areas.
    AllAdmissible,
    /// One run with the same areas and different actions.
    OneWitness,
}

/// Runs of the opacity system with the argument's input and areas, found
/// by searching the strategy (at most `limit` runs are visited).
#[derive(Clone, Debug)]
pub struct EqArea {
    pub mode: EqAreaMode,
    pub system: OpacitySystem,
    pub limit: usize,
}

impl Generator for EqArea {
    fn arity(&self) -> Option<usize> {
        Some(1)
    }

    fn instance(&self) -> Box<dyn GenInstance> {
        let g = self.clone();
        Box::new(OnTermination(move |args: &[&Trace]| {
            let t = args[0];
            let runs = match g.mode {
                EqAreaMode::AllAdmissible => g.system.eqarea_all(t, g.limit),
                EqAreaMode::OneWitness => g.system.eqarea_witness(t, g.limit).into_iter().collect(),
            };
            Ok(runs
                .into_iter()
                .map(|evs| Trace::complete("", evs))
                .collect())
        }))
    }
}
