use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::{Valuation, Value};

pub type TraceId = Arc<str>;

/// A finite trace, possibly still growing.
///
/// Letters are stored as `Value::Event` so that projections can be applied
/// without converting.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Trace {
    id: TraceId,
    letters: Vec<Value>,
    terminated: bool,
}

impl Trace {
    /// An empty, non-terminated trace.
    pub fn new(id: &str) -> Self {
        Trace {
            id: Arc::from(id),
            letters: Vec::new(),
            terminated: false,
        }
    }

    /// A terminated trace with the given events.
    pub fn complete(id: &str, events: impl IntoIterator<Item = Valuation>) -> Self {
        Trace {
            id: Arc::from(id),
            letters: events.into_iter().map(Value::Event).collect(),
            terminated: true,
        }
    }

    pub fn id(&self) -> &TraceId {
        &self.id
    }

    pub fn set_id(&mut self, id: &str) {
        self.id = Arc::from(id);
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// The events as values (always `Value::Event`).
    pub fn letters(&self) -> &[Value] {
        &self.letters
    }

    pub fn event(&self, i: usize) -> Option<&Valuation> {
        self.letters.get(i).and_then(Value::as_event)
    }

    pub fn events(&self) -> impl Iterator<Item = &Valuation> {
        self.letters.iter().filter_map(Value::as_event)
    }

    pub fn push(&mut self, event: Valuation) -> Result<(), UpdateError> {
        if self.terminated {
            return Err(UpdateError::Terminated(self.id.to_string()));
        }
        self.letters.push(Value::Event(event));
        Ok(())
    }

    pub fn terminate(&mut self) {
        self.terminated = true;
    }
}

/// One update to an observation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Delta {
    AddTrace(TraceId),
    Append(TraceId, Valuation),
    Terminate(TraceId),
    Close,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UpdateError {
    UnknownTrace(String),
    DuplicateTrace(String),
    Terminated(String),
    Closed,
}

impl fmt::Display for UpdateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpdateError::UnknownTrace(id) => write!(f, "unknown trace `{id}`"),
            UpdateError::DuplicateTrace(id) => write!(f, "trace `{id}` already exists"),
            UpdateError::Terminated(id) => write!(f, "trace `{id}` is already terminated"),
            UpdateError::Closed => f.write_str("the observation is closed"),
        }
    }
}

impl core::error::Error for UpdateError {}

/// A growing set of traces.
///
/// Traces only ever grow: new traces are added, events are appended to
/// non-terminated traces, traces are terminated, and the whole set may be
/// closed (no further traces). Every successful update bumps the revision
/// and is recorded so that consumers can catch up with [`Observation::deltas_since`].
#[derive(Clone, Debug, Default)]
pub struct Observation {
    traces: Vec<Trace>,
    index: BTreeMap<TraceId, usize>,
    log: Vec<Delta>,
    closed: bool,
}

impl Observation {
    pub fn new() -> Self {
        Self::default()
    }

    /// A closed observation of the given (already complete) traces.
    pub fn closed_from(traces: impl IntoIterator<Item = Trace>) -> Result<Self, UpdateError> {
        let mut obs = Observation::new();
        for t in traces {
            obs.insert_trace(t)?;
        }
        obs.close();
        Ok(obs)
    }

    pub fn revision(&self) -> u64 {
        self.log.len() as u64
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Trace> {
        self.index.get(id).map(|&i| &self.traces[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn deltas_since(&self, revision: u64) -> &[Delta] {
        let start = (revision as usize).min(self.log.len());
        &self.log[start..]
    }

    pub fn add_trace(&mut self, id: &str) -> Result<u64, UpdateError> {
        self.apply(Delta::AddTrace(Arc::from(id)))
    }

    pub fn append_event(&mut self, id: &str, event: Valuation) -> Result<u64, UpdateError> {
        self.apply(Delta::Append(Arc::from(id), event))
    }

    pub fn terminate_trace(&mut self, id: &str) -> Result<u64, UpdateError> {
        self.apply(Delta::Terminate(Arc::from(id)))
    }

    /// Closes the observation. Closing twice is a no-op.
    pub fn close(&mut self) -> u64 {
        if !self.closed {
            self.closed = true;
            self.log.push(Delta::Close);
        }
        self.revision()
    }

    /// Adds a whole trace (events and termination status) at once.
    pub fn insert_trace(&mut self, trace: Trace) -> Result<u64, UpdateError> {
        self.add_trace(trace.id())?;
        for ev in trace.events() {
            self.append_event(trace.id(), ev.clone())?;
        }
        if trace.is_terminated() {
            self.terminate_trace(trace.id())?;
        }
        Ok(self.revision())
    }

    pub fn apply(&mut self, delta: Delta) -> Result<u64, UpdateError> {
        match &delta {
            Delta::AddTrace(id) => {
                if self.closed {
                    return Err(UpdateError::Closed);
                }
                if self.index.contains_key(id) {
                    return Err(UpdateError::DuplicateTrace(id.to_string()));
                }
                self.index.insert(id.clone(), self.traces.len());
                self.traces.push(Trace::new(id));
            }
            Delta::Append(id, ev) => {
                let i = self.lookup(id)?;
                self.traces[i].push(ev.clone())?;
            }
            Delta::Terminate(id) => {
                let i = self.lookup(id)?;
                if self.traces[i].is_terminated() {
                    return Err(UpdateError::Terminated(id.to_string()));
                }
                self.traces[i].terminate();
            }
            Delta::Close => return Ok(self.close()),
        }
        self.log.push(delta);
        Ok(self.revision())
    }

    /// Rebuilds an observation from a delta log.
    pub fn replay<'a>(deltas: impl IntoIterator<Item = &'a Delta>) -> Result<Self, UpdateError> {
        let mut obs = Observation::new();
        for d in deltas {
            obs.apply(d.clone())?;
        }
        Ok(obs)
    }

    fn lookup(&self, id: &str) -> Result<usize, UpdateError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| UpdateError::UnknownTrace(id.into()))
    }
}
