//! The quantifier-instantiation monitor.
//!
//! A [`Monitor`] owns a tree of sub-monitors. Every inner node stands for
//! the first remaining quantifier block under a partial assignment of
//! traces; it spawns one child per tuple of traces that its source (the
//! observation or a generator) offers. A node with a single remaining
//! block delegates to a basic monitor, which instantiates the block with
//! every tuple and decides the body with prefix automata. Existential
//! blocks are monitored through their negation.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::formula::{Formula, Var};
use crate::formula::{FragmentError, Prenex, QuantifierBlock, Source};
use crate::generators::{GenError, GeneratorRegistry};
use crate::trace::{DataDomain, Observation, Trace, TraceId};
use crate::transducer::{CompileError, PrefixAutomaton};

mod basic;
mod tree;

use basic::AtomTable;
use tree::Node;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    True,
    False,
    Unknown,
    /// Some source offered more traces than the configured bound.
    GaveUp,
}

impl Verdict {
    pub fn is_conclusive(self) -> bool {
        matches!(self, Verdict::True | Verdict::False)
    }

    /// Swaps true and false.
    pub fn negate(self) -> Verdict {
        match self {
            Verdict::True => Verdict::False,
            Verdict::False => Verdict::True,
            v => v,
        }
    }

    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Unknown => "unknown",
            Verdict::GaveUp => "unknown-gave-up",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonitorConfig {
    /// A node gives up once its source has offered more traces than this.
    pub give_up: usize,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig { give_up: 2048 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonitorError {
    Fragment(FragmentError),
    Compile { atom: String, error: CompileError },
    Generator(GenError),
}

impl fmt::Display for MonitorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonitorError::Fragment(e) => e.fmt(f),
            MonitorError::Compile { atom, error } => write!(f, "cannot compile `{atom}`: {error}"),
            MonitorError::Generator(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for MonitorError {}

impl From<FragmentError> for MonitorError {
    fn from(e: FragmentError) -> Self {
        MonitorError::Fragment(e)
    }
}

impl From<GenError> for MonitorError {
    fn from(e: GenError) -> Self {
        MonitorError::Generator(e)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonitorStats {
    pub steps: u64,
    /// Sub-monitors created (inner nodes and basic monitors).
    pub nodes: u64,
    pub nodes_alive: u64,
    /// Tuples instantiated by basic monitors.
    pub tuples: u64,
    /// Most tuples one basic monitor held at the start of a step.
    pub tuples_peak: u64,
    /// Traces taken from sources, counted per node.
    pub traces: u64,
    pub atoms_started: u64,
    pub atom_steps: u64,
    /// Automaton configurations explored.
    pub configurations: u64,
    pub generator_queries: u64,
}

/// A trace bound to a variable: an observed trace (by position) or a
/// generated one.
#[derive(Clone, Debug)]
pub(crate) enum TraceRef {
    Obs(usize),
    Gen(Arc<Trace>),
}

impl TraceRef {
    pub(crate) fn get<'a>(&'a self, obs: &'a Observation) -> &'a Trace {
        match self {
            TraceRef::Obs(i) => &obs.traces()[*i],
            TraceRef::Gen(t) => t,
        }
    }

    /// Length and termination, or `None` for traces that cannot change.
    pub(crate) fn shape(&self, obs: &Observation) -> Option<(usize, bool)> {
        match self {
            TraceRef::Obs(i) => {
                let t = &obs.traces()[*i];
                Some((t.len(), t.is_terminated()))
            }
            TraceRef::Gen(_) => None,
        }
    }
}

/// A partial assignment, stored as a chain of bindings shared with the
/// parent node.
#[derive(Debug)]
pub(crate) struct Binding {
    var: Var,
    trace: TraceRef,
    parent: Asg,
}

pub(crate) type Asg = Option<Arc<Binding>>;

pub(crate) fn bind(parent: &Asg, var: Var, trace: TraceRef) -> Asg {
    Some(Arc::new(Binding {
        var,
        trace,
        parent: parent.clone(),
    }))
}

pub(crate) fn lookup<'a>(asg: &'a Asg, var: &str) -> Option<&'a TraceRef> {
    let mut cur = asg.as_deref();
    while let Some(b) = cur {
        if &*b.var == var {
            return Some(&b.trace);
        }
        cur = b.parent.as_deref();
    }
    None
}

fn bindings(asg: &Asg, obs: &Observation) -> Vec<(Var, TraceId)> {
    let mut out = Vec::new();
    let mut cur = asg.as_deref();
    while let Some(b) = cur {
        out.push((b.var.clone(), b.trace.get(obs).id().clone()));
        cur = b.parent.as_deref();
    }
    out.reverse();
    out
}

/// Everything a step needs besides the node itself.
pub(crate) struct Ctx<'a> {
    pub obs: &'a Observation,
    pub domain: &'a DataDomain,
    pub registry: &'a mut GeneratorRegistry,
    pub table: &'a AtomTable,
    pub blocks: &'a [QuantifierBlock],
    /// Automata of atoms compiled per tuple once their traces are complete.
    pub deferred: &'a mut BTreeMap<(usize, [Option<TraceId>; 2]), Arc<PrefixAutomaton>>,
    pub stats: &'a mut MonitorStats,
    pub config: &'a MonitorConfig,
    /// Bumped whenever a step changes any state.
    pub progress: u64,
}

impl Ctx<'_> {
    /// Traces of a source from position `from` on, and whether the source
    /// will offer no more.
    pub(crate) fn fetch(
        &mut self,
        source: &Source,
        asg: &Asg,
        from: usize,
    ) -> Result<(Vec<TraceRef>, bool), MonitorError> {
        match source {
            Source::Observation => {
                let n = self.obs.len();
                Ok((
                    (from.min(n)..n).map(TraceRef::Obs).collect(),
                    self.obs.is_closed(),
                ))
            }
            Source::Generator { name, args } => {
                let obs = self.obs;
                let args: Vec<&Trace> = args
                    .iter()
                    .map(|a| {
                        lookup(asg, a)
                            .expect("generator arguments are bound")
                            .get(obs)
                    })
                    .collect();
                self.stats.generator_queries += 1;
                let snap = self.registry.query_from(name, &args, from)?;
                Ok((
                    snap.traces.into_iter().map(TraceRef::Gen).collect(),
                    snap.closed,
                ))
            }
        }
    }
}

/// A monitor for one closed formula in the monitorable fragment.
pub struct Monitor {
    prenex: Prenex,
    blocks: Vec<QuantifierBlock>,
    domain: Arc<DataDomain>,
    registry: GeneratorRegistry,
    table: AtomTable,
    deferred: BTreeMap<(usize, [Option<TraceId>; 2]), Arc<PrefixAutomaton>>,
    config: MonitorConfig,
    root: Node,
    stats: MonitorStats,
}

impl fmt::Debug for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Monitor")
            .field("formula", &self.prenex.to_formula().to_string())
            .field("verdict", &self.root.verdict())
            .finish()
    }
}

impl Monitor {
    /// Checks the formula (closed, prenex, monitorable, simple atoms),
    /// that every generator it uses is registered with a matching arity,
    /// and compiles its atoms.
    pub fn new(
        formula: &Formula,
        domain: Arc<DataDomain>,
        registry: GeneratorRegistry,
        config: MonitorConfig,
    ) -> Result<Self, MonitorError> {
        let prenex = formula.prenex()?;
        prenex.check_well_formed()?;
        prenex.check_monitorable()?;
        for (name, n) in formula.generators() {
            match registry.arity(&name) {
                None => return Err(FragmentError::UnknownGenerator(name.to_string()).into()),
                Some(Some(expected)) if expected != n => {
                    return Err(FragmentError::GeneratorArity {
                        generator: name.to_string(),
                        expected,
                        found: n,
                    }
                    .into())
                }
                Some(_) => {}
            }
        }
        let table = AtomTable::new(&prenex.body, &domain)?;
        let blocks = prenex.blocks();
        let root = Node::new(&blocks, &table, 0, false, None);
        Ok(Monitor {
            prenex,
            blocks,
            domain,
            registry,
            table,
            deferred: BTreeMap::new(),
            config,
            root,
            stats: MonitorStats {
                nodes: 1,
                nodes_alive: 1,
                ..MonitorStats::default()
            },
        })
    }

    pub fn prenex(&self) -> &Prenex {
        &self.prenex
    }

    pub fn blocks(&self) -> &[QuantifierBlock] {
        &self.blocks
    }

    pub fn domain(&self) -> &Arc<DataDomain> {
        &self.domain
    }

    pub fn registry(&self) -> &GeneratorRegistry {
        &self.registry
    }

    pub fn stats(&self) -> &MonitorStats {
        &self.stats
    }

    pub fn verdict(&self) -> Verdict {
        self.root.verdict()
    }

    /// Number of atoms of the body and nodes of its decision diagram.
    pub fn atom_table_size(&self) -> (usize, usize) {
        (self.table.len(), self.table.diagram_size())
    }

    /// One round over the tree with the observation as it is now.
    pub fn step(&mut self, obs: &Observation) -> Result<Verdict, MonitorError> {
        self.step_counting(obs).map(|(v, _)| v)
    }

    fn step_counting(&mut self, obs: &Observation) -> Result<(Verdict, u64), MonitorError> {
        self.stats.steps += 1;
        let mut ctx = Ctx {
            obs,
            domain: &self.domain,
            registry: &mut self.registry,
            table: &self.table,
            blocks: &self.blocks,
            deferred: &mut self.deferred,
            stats: &mut self.stats,
            config: &self.config,
            progress: 0,
        };
        let v = self.root.step(&mut ctx)?;
        let progress = ctx.progress;
        Ok((v, progress))
    }

    /// Steps until the verdict is conclusive, the monitor gives up, or a
    /// step changes nothing.
    pub fn run(&mut self, obs: &Observation) -> Result<Verdict, MonitorError> {
        loop {
            let (v, progress) = self.step_counting(obs)?;
            if v != Verdict::Unknown || progress == 0 {
                return Ok(v);
            }
        }
    }

    /// For a conclusive verdict: the assignment of the tuple that decided
    /// it, outermost variable first. A violating tuple for a false
    /// universal formula, the witnesses for a true existential one.
    pub fn witness(&self, obs: &Observation) -> Option<Vec<(Var, TraceId)>> {
        self.root.witness().map(|asg| bindings(asg, obs))
    }
}
