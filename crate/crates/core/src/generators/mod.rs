//! Generator functions as incrementally populated trace sets.
//!
//! A [`Generator`] is a named factory. For every tuple of argument traces
//! the [`GeneratorRegistry`] keeps one [`GenInstance`], feeds it the
//! current argument traces whenever they change and collects what it
//! produces. Produced sets only grow, and stop growing once the instance
//! declares them closed.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::oracle::{GeneratorFn, GeneratorInterp};
use crate::trace::{Trace, TraceId};

mod builtin;
mod queue;
mod robot;

pub use builtin::{builtin, Options, BUILTINS};
pub use queue::{Ext, Legal, Lin, Sub};
pub use robot::{EqArea, EqAreaMode, Samples};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenError {
    /// An argument trace does not have the shape the generator expects.
    Malformed(String),
    /// The generator cannot run (unknown name, bad options, missing system).
    Unavailable(String),
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::Malformed(m) => write!(f, "malformed generator argument: {m}"),
            GenError::Unavailable(m) => write!(f, "generator unavailable: {m}"),
        }
    }
}

impl core::error::Error for GenError {}

pub trait Generator: Send + Sync {
    /// Number of arguments, or `None` for any.
    fn arity(&self) -> Option<usize>;
    fn instance(&self) -> Box<dyn GenInstance>;
}

/// The state of a generator for one argument tuple.
pub trait GenInstance: Send {
    /// Called with the current argument traces, which may still grow.
    /// Appends newly produced traces to `out` and returns whether the
    /// produced set is complete.
    fn advance(&mut self, args: &[&Trace], out: &mut Vec<Trace>) -> Result<bool, GenError>;
}

/// Produced traces of one argument tuple.
#[derive(Clone, Debug, Default)]
pub struct Snapshot {
    pub traces: Vec<Arc<Trace>>,
    pub closed: bool,
}

struct Object {
    instance: Box<dyn GenInstance>,
    traces: Vec<Arc<Trace>>,
    closed: bool,
    /// Lengths and termination of the arguments at the last update.
    seen: Option<Vec<(usize, bool)>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GenStats {
    pub objects: usize,
    pub produced: usize,
    pub updates: usize,
}

/// Named generators and their per-argument objects.
#[derive(Default)]
pub struct GeneratorRegistry {
    generators: BTreeMap<Arc<str>, Arc<dyn Generator>>,
    objects: BTreeMap<(Arc<str>, Vec<TraceId>), Object>,
    stats: GenStats,
}

impl fmt::Debug for GeneratorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.generators.keys()).finish()
    }
}

impl GeneratorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every function of the interpretation, evaluated once all its
    /// arguments are terminated.
    pub fn from_interp(sigma: &GeneratorInterp, names: impl IntoIterator<Item = Arc<str>>) -> Self {
        let mut r = Self::new();
        for name in names {
            if let Some(f) = sigma.get(&name) {
                r.register(&name, Arc::new(FnGenerator::new(None, f.clone())));
            }
        }
        r
    }

    pub fn register(&mut self, name: &str, generator: Arc<dyn Generator>) {
        self.generators.insert(Arc::from(name), generator);
    }

    pub fn with(mut self, name: &str, generator: impl Generator + 'static) -> Self {
        self.register(name, Arc::new(generator));
        self
    }

    pub fn contains(&self, name: &str) -> bool {
        self.generators.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.generators.keys().map(|k| &**k)
    }

    pub fn arity(&self, name: &str) -> Option<Option<usize>> {
        self.generators.get(name).map(|g| g.arity())
    }

    pub fn stats(&self) -> &GenStats {
        &self.stats
    }

    /// Updates the object for `name(args)` and returns the traces it
    /// produced from position `from` on, and whether it is closed.
    pub fn query_from(
        &mut self,
        name: &str,
        args: &[&Trace],
        from: usize,
    ) -> Result<Snapshot, GenError> {
        let key: (Arc<str>, Vec<TraceId>) = (
            Arc::from(name),
            args.iter().map(|t| t.id().clone()).collect(),
        );
        if !self.objects.contains_key(&key) {
            let g = self.generators.get(name).ok_or_else(|| {
                GenError::Unavailable(format!("no generator registered under `{name}`"))
            })?;
            if let Some(n) = g.arity() {
                if n != args.len() {
                    return Err(GenError::Unavailable(format!(
                        "`{name}` takes {n} argument(s), {} given",
                        args.len()
                    )));
                }
            }
            self.objects.insert(
                key.clone(),
                Object {
                    instance: g.instance(),
                    traces: Vec::new(),
                    closed: false,
                    seen: None,
                },
            );
            self.stats.objects += 1;
        }
        let obj = self.objects.get_mut(&key).unwrap();
        let shape: Vec<(usize, bool)> = args.iter().map(|t| (t.len(), t.is_terminated())).collect();
        if !obj.closed && obj.seen.as_ref() != Some(&shape) {
            let mut out = Vec::new();
            obj.closed = obj.instance.advance(args, &mut out)?;
            obj.seen = Some(shape);
            self.stats.updates += 1;
            let prefix = produced_prefix(name, &key.1);
            for mut t in out {
                t.set_id(&format!("{prefix}#{}", obj.traces.len()));
                obj.traces.push(Arc::new(t));
                self.stats.produced += 1;
            }
        }
        Ok(Snapshot {
            traces: obj
                .traces
                .get(from..)
                .map(<[_]>::to_vec)
                .unwrap_or_default(),
            closed: obj.closed,
        })
    }

    pub fn query(&mut self, name: &str, args: &[&Trace]) -> Result<Snapshot, GenError> {
        self.query_from(name, args, 0)
    }

    /// Drops all objects; generators stay registered.
    pub fn reset(&mut self) {
        self.objects.clear();
        self.stats = GenStats::default();
    }
}

fn produced_prefix(name: &str, args: &[TraceId]) -> String {
    let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
    format!("{name}({})", args.join(","))
}

/// A plain function from argument traces to a trace set, evaluated once
/// every argument is terminated.
pub struct FnGenerator {
    arity: Option<usize>,
    f: Arc<GeneratorFn>,
}

impl FnGenerator {
    pub fn new(arity: Option<usize>, f: Arc<GeneratorFn>) -> Self {
        FnGenerator { arity, f }
    }

    pub fn from_fn(
        arity: Option<usize>,
        f: impl Fn(&[&Trace]) -> Vec<Trace> + Send + Sync + 'static,
    ) -> Self {
        FnGenerator::new(arity, Arc::new(f))
    }
}

impl Generator for FnGenerator {
    fn arity(&self) -> Option<usize> {
        self.arity
    }

    fn instance(&self) -> Box<dyn GenInstance> {
        let f = self.f.clone();
        Box::new(OnTermination(move |args: &[&Trace]| Ok(f(args))))
    }
}

/// Runs a function once all arguments are terminated.
pub(crate) struct OnTermination<F>(pub F);

impl<F> GenInstance for OnTermination<F>
where
    F: FnMut(&[&Trace]) -> Result<Vec<Trace>, GenError> + Send,
{
    fn advance(&mut self, args: &[&Trace], out: &mut Vec<Trace>) -> Result<bool, GenError> {
        if !args.iter().all(|t| t.is_terminated()) {
            return Ok(false);
        }
        out.extend((self.0)(args)?);
        Ok(true)
    }
}

#[cfg(test)]
mod tests;
