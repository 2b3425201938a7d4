//! Generators over histories: prefixes, completions of pending
//! invocations, linearizations and their replay on a reference queue.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::{GenError, GenInstance, Generator, OnTermination};
use crate::scenarios::queue::{self, HistoryError};
use crate::trace::{Trace, Valuation, Value};

/// All prefixes of the argument, from the empty trace to the argument
/// itself, produced as the argument grows.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sub;

struct SubInstance {
    emitted: usize,
}

impl Generator for Sub {
    fn arity(&self) -> Option<usize> {
        Some(1)
    }

    fn instance(&self) -> Box<dyn GenInstance> {
        Box::new(SubInstance { emitted: 0 })
    }
}

impl GenInstance for SubInstance {
    fn advance(&mut self, args: &[&Trace], out: &mut Vec<Trace>) -> Result<bool, GenError> {
        let t = args[0];
        while self.emitted <= t.len() {
            out.push(Trace::complete("", t.events().take(self.emitted).cloned()));
            self.emitted += 1;
        }
        Ok(t.is_terminated())
    }
}

/// Completions of an event-based history (events with `tp` = `inv` or
/// `res`, `proc`, `op`, `param`): every pending invocation gets a response
/// carrying one of the declared response values, in order of process.
#[derive(Clone, Debug)]
pub struct Ext {
    responses: Vec<Value>,
}

impl Ext {
    /// Rejects an empty response domain.
    pub fn new(responses: Vec<Value>) -> Result<Self, GenError> {
        if responses.is_empty() {
            return Err(GenError::Unavailable(
                "ext needs a finite, nonempty set of response values".into(),
            ));
        }
        Ok(Ext { responses })
    }

    /// Pending invocations, one per process, ordered by process.
    pub fn pending(trace: &Trace) -> Result<Vec<Valuation>, GenError> {
        let mut open: BTreeMap<Value, Option<Valuation>> = BTreeMap::new();
        for (i, e) in trace.events().enumerate() {
            let proc = e
                .get("proc")
                .cloned()
                .ok_or_else(|| GenError::Malformed(format!("event {i} has no `proc`")))?;
            match e.get("tp").and_then(Value::as_sym) {
                Some("inv") => {
                    if matches!(open.get(&proc), Some(Some(_))) {
                        return Err(GenError::Malformed(format!(
                            "event {i}: invocation while one is pending"
                        )));
                    }
                    open.insert(proc, Some(e.clone()));
                }
                Some("res") => {
                    if !matches!(open.get(&proc), Some(Some(_))) {
                        return Err(GenError::Malformed(format!(
                            "event {i}: response without invocation"
                        )));
                    }
                    open.insert(proc, None);
                }
                _ => return Err(GenError::Malformed(format!("event {i} has no valid `tp`"))),
            }
        }
        Ok(open.into_values().flatten().collect())
    }

    pub fn extensions(&self, trace: &Trace) -> Result<Vec<Trace>, GenError> {
        let pending = Self::pending(trace)?;
        let mut out = Vec::new();
        let mut choice = alloc::vec![0usize; pending.len()];
        loop {
            let mut t = Trace::new(trace.id());
            for e in trace.events() {
                t.push(e.clone()).expect("fresh trace");
            }
            for (inv, &c) in pending.iter().zip(&choice) {
                let res = inv
                    .with("tp", Value::sym("res"))
                    .with("param", self.responses[c].clone());
                t.push(res).expect("fresh trace");
            }
            t.terminate();
            out.push(t);
            // Next choice vector, odometer style.
            let mut k = 0;
            while k < choice.len() {
                choice[k] += 1;
                if choice[k] < self.responses.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == choice.len() {
                return Ok(out);
            }
        }
    }
}

impl Generator for Ext {
    fn arity(&self) -> Option<usize> {
        Some(1)
    }

    fn instance(&self) -> Box<dyn GenInstance> {
        let ext = self.clone();
        Box::new(OnTermination(move |args: &[&Trace]| {
            ext.extensions(args[0])
        }))
    }
}

fn malformed(e: HistoryError) -> GenError {
    GenError::Malformed(format!("{e}"))
}

/// One linearization of an operation-based history, or nothing.
#[derive(Clone, Copy, Debug, Default)]
pub struct Lin;

impl Lin {
    pub fn linearization(trace: &Trace) -> Result<Option<Trace>, GenError> {
        let ops = queue::history_of(trace).map_err(malformed)?;
        let order = queue::linearize(&ops).map_err(malformed)?;
        Ok(order.map(|o| queue::sequential_trace(trace.id(), &o)))
    }
}

impl Generator for Lin {
    fn arity(&self) -> Option<usize> {
        Some(1)
    }

    fn instance(&self) -> Box<dyn GenInstance> {
        Box::new(OnTermination(|args: &[&Trace]| {
            Ok(Lin::linearization(args[0])?.into_iter().collect())
        }))
    }
}

/// The argument itself if it replays on the reference queue, else nothing.
#[derive(Clone, Copy, Debug, Default)]
pub struct Legal;

impl Generator for Legal {
    fn arity(&self) -> Option<usize> {
        Some(1)
    }

    fn instance(&self) -> Box<dyn GenInstance> {
        Box::new(OnTermination(|args: &[&Trace]| {
            let t = args[0];
            Ok(if queue::legal(t) {
                alloc::vec![t.clone()]
            } else {
                Vec::new()
            })
        }))
    }
}
