//! The basic monitor: one universally quantified block over one source,
//! with the body decided tuple by tuple.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{bind, lookup, Asg, Ctx, MonitorError, TraceRef, Verdict};
use crate::bdd::{Bdd, NodeId};
use crate::formula::Source;
use crate::formula::{Formula, TraceFormula, Var};
use crate::trace::{DataDomain, Trace, Value};
use crate::transducer::{
    compile_atom, needs_whole_trace, AtomRun, AtomStatus, CompileError, PrefixAutomaton, TapeView,
};

/// One atom `lhs <= rhs` of the body.
pub(crate) struct AtomSpec {
    lhs: TraceFormula,
    rhs: TraceFormula,
    /// The trace variable each side reads, if any.
    vars: [Option<Var>; 2],
    /// Sides that can only be compiled once their trace is complete.
    whole: [bool; 2],
    automaton: Option<Arc<PrefixAutomaton>>,
}

/// The atoms of a body and a decision diagram of its boolean structure.
pub(crate) struct AtomTable {
    atoms: Vec<AtomSpec>,
    bdd: Bdd,
    pos: NodeId,
    neg: NodeId,
}

impl AtomTable {
    pub(crate) fn new(body: &Formula, domain: &DataDomain) -> Result<Self, MonitorError> {
        let mut atoms = Vec::new();
        for (lhs, rhs) in body.atoms() {
            let side_var = |tf: &TraceFormula| tf.vars().into_iter().next();
            let whole = [needs_whole_trace(lhs), needs_whole_trace(rhs)];
            let automaton = if whole[0] || whole[1] {
                for p in lhs.projections().iter().chain(rhs.projections().iter()) {
                    if !domain.has_projection(p) {
                        return Err(MonitorError::Compile {
                            atom: Formula::Leq(lhs.clone(), rhs.clone()).to_string(),
                            error: CompileError::UnknownProjection(p.to_string()),
                        });
                    }
                }
                None
            } else {
                Some(Arc::new(compile_atom(lhs, rhs, domain).map_err(
                    |error| MonitorError::Compile {
                        atom: Formula::Leq(lhs.clone(), rhs.clone()).to_string(),
                        error,
                    },
                )?))
            };
            atoms.push(AtomSpec {
                lhs: lhs.clone(),
                rhs: rhs.clone(),
                vars: [side_var(lhs), side_var(rhs)],
                whole,
                automaton,
            });
        }
        let mut bdd = Bdd::new();
        let index: BTreeMap<(&TraceFormula, &TraceFormula), u32> = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| ((&a.lhs, &a.rhs), i as u32))
            .collect();
        let pos = diagram(body, &mut bdd, &index);
        let neg = bdd.not(pos);
        Ok(AtomTable {
            atoms,
            bdd,
            pos,
            neg,
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.atoms.len()
    }

    pub(crate) fn diagram_size(&self) -> usize {
        self.bdd.size(self.pos)
    }

    pub(crate) fn root(&self, negated: bool) -> NodeId {
        if negated {
            self.neg
        } else {
            self.pos
        }
    }
}

fn diagram(
    f: &Formula,
    bdd: &mut Bdd,
    index: &BTreeMap<(&TraceFormula, &TraceFormula), u32>,
) -> NodeId {
    match f {
        Formula::Leq(a, b) => bdd.var(index[&(a, b)]),
        Formula::Not(a) => {
            let x = diagram(a, bdd, index);
            bdd.not(x)
        }
        Formula::And(a, b) => {
            let x = diagram(a, bdd, index);
            let y = diagram(b, bdd, index);
            bdd.and(x, y)
        }
        Formula::Exists { .. } | Formula::ExistsIn { .. } => {
            unreachable!("bodies are quantifier-free")
        }
    }
}

enum Slot {
    Idle,
    Run(AtomRun),
    Done(bool),
}

/// One instantiation of the block.
struct Job {
    /// Positions in `known` of the traces bound to the block variables.
    tuple: Vec<u32>,
    atoms: Vec<Slot>,
    fresh: bool,
}

/// Where an atom side's trace comes from.
#[derive(Clone, Copy)]
enum SideRef {
    Block(usize),
    Outer(usize),
    Nothing,
}

pub(crate) struct BasicMonitor {
    vars: Vec<Var>,
    source: Source,
    root: NodeId,
    asg: Asg,
    outer: Vec<TraceRef>,
    outer_shapes: Vec<Option<(usize, bool)>>,
    sides: Vec<[SideRef; 2]>,
    known: Vec<TraceRef>,
    shapes: Vec<Option<(usize, bool)>>,
    jobs: Vec<Job>,
    started: bool,
    verdict: Verdict,
    witness: Asg,
}

impl BasicMonitor {
    /// `vars` range over `source`; the other free variables of the body
    /// are bound by `asg`. Decides the body rooted at `root` for every
    /// tuple.
    pub(crate) fn new(
        table: &AtomTable,
        vars: Vec<Var>,
        source: Source,
        root: NodeId,
        asg: Asg,
    ) -> Self {
        let mut outer_vars: Vec<Var> = Vec::new();
        let sides = table
            .atoms
            .iter()
            .map(|a| {
                a.vars.clone().map(|v| match v {
                    None => SideRef::Nothing,
                    Some(v) => match vars.iter().position(|x| *x == v) {
                        Some(i) => SideRef::Block(i),
                        None => {
                            let i = outer_vars.iter().position(|x| *x == v).unwrap_or_else(|| {
                                outer_vars.push(v.clone());
                                outer_vars.len() - 1
                            });
                            SideRef::Outer(i)
                        }
                    },
                })
            })
            .collect();
        let outer = outer_vars
            .iter()
            .map(|v| lookup(&asg, v).expect("free variables are bound").clone())
            .collect();
        BasicMonitor {
            vars,
            source,
            root,
            asg,
            outer_shapes: alloc::vec![None; outer_vars.len()],
            outer,
            sides,
            known: Vec::new(),
            shapes: Vec::new(),
            jobs: Vec::new(),
            started: false,
            verdict: Verdict::Unknown,
            witness: None,
        }
    }

    pub(crate) fn witness(&self) -> Option<&Asg> {
        self.witness.as_ref().map(|_| &self.witness)
    }

    /// Creates a job for every tuple over `known` that contains the trace
    /// at `newest` (all earlier traces already have theirs).
    fn add_tuples(&mut self, newest: usize, ctx: &mut Ctx<'_>) {
        let k = self.vars.len();
        let atoms = ctx.table.atoms.len();
        // Split by the first position holding `newest`: positions before
        // it range below `newest`, positions after it up to `newest`.
        for p in 0..k {
            let ranges: Vec<usize> = (0..k)
                .map(|i| match i.cmp(&p) {
                    core::cmp::Ordering::Less => newest,
                    core::cmp::Ordering::Equal => 1,
                    core::cmp::Ordering::Greater => newest + 1,
                })
                .collect();
            if ranges.contains(&0) {
                continue;
            }
            let mut digits = alloc::vec![0usize; k];
            loop {
                let tuple = (0..k)
                    .map(|i| if i == p { newest } else { digits[i] } as u32)
                    .collect();
                self.jobs.push(Job {
                    tuple,
                    atoms: (0..atoms).map(|_| Slot::Idle).collect(),
                    fresh: true,
                });
                ctx.stats.tuples += 1;
                ctx.progress += 1;
                let mut i = k;
                let carry = loop {
                    if i == 0 {
                        break true;
                    }
                    i -= 1;
                    digits[i] += 1;
                    if digits[i] < ranges[i] {
                        break false;
                    }
                    digits[i] = 0;
                };
                if carry {
                    break;
                }
            }
        }
    }

    pub(crate) fn step(&mut self, ctx: &mut Ctx<'_>) -> Result<Verdict, MonitorError> {
        if self.verdict != Verdict::Unknown {
            return Ok(self.verdict);
        }
        let closed = if self.vars.is_empty() {
            if !self.started {
                self.started = true;
                self.jobs.push(Job {
                    tuple: Vec::new(),
                    atoms: (0..ctx.table.atoms.len()).map(|_| Slot::Idle).collect(),
                    fresh: true,
                });
                ctx.stats.tuples += 1;
                ctx.progress += 1;
            }
            true
        } else {
            let (new, closed) = ctx.fetch(&self.source, &self.asg, self.known.len())?;
            for t in new {
                if self.known.len() >= ctx.config.give_up {
                    self.verdict = Verdict::GaveUp;
                    return Ok(self.verdict);
                }
                ctx.stats.traces += 1;
                self.shapes.push(t.shape(ctx.obs));
                self.known.push(t);
                self.add_tuples(self.known.len() - 1, ctx);
            }
            closed
        };
        let mut dirty = alloc::vec![false; self.known.len()];
        for (i, t) in self.known.iter().enumerate() {
            let s = t.shape(ctx.obs);
            if s != self.shapes[i] {
                self.shapes[i] = s;
                dirty[i] = true;
            }
        }
        let mut outer_dirty = false;
        for (i, t) in self.outer.iter().enumerate() {
            let s = t.shape(ctx.obs);
            if s != self.outer_shapes[i] {
                self.outer_shapes[i] = s;
                outer_dirty = true;
            }
        }
        let mut jobs = core::mem::take(&mut self.jobs);
        ctx.stats.tuples_peak = ctx.stats.tuples_peak.max(jobs.len() as u64);
        let mut failed = None;
        let mut i = 0;
        while i < jobs.len() {
            let job = &mut jobs[i];
            let touched = job.fresh || outer_dirty || job.tuple.iter().any(|&t| dirty[t as usize]);
            job.fresh = false;
            if touched {
                match self.decide(job, ctx)? {
                    Some(true) => {
                        jobs.swap_remove(i);
                        ctx.progress += 1;
                        continue;
                    }
                    Some(false) => {
                        failed = Some(i);
                        break;
                    }
                    None => {}
                }
            }
            i += 1;
        }
        if let Some(i) = failed {
            let mut asg = self.asg.clone();
            for (v, &t) in self.vars.iter().zip(&jobs[i].tuple) {
                asg = bind(&asg, v.clone(), self.known[t as usize].clone());
            }
            self.witness = asg;
            self.verdict = Verdict::False;
            self.jobs.clear();
            ctx.progress += 1;
            return Ok(self.verdict);
        }
        self.jobs = jobs;
        if closed && self.jobs.is_empty() {
            self.verdict = Verdict::True;
            ctx.progress += 1;
        }
        Ok(self.verdict)
    }

    fn trace<'a>(&'a self, side: SideRef, job: &Job, ctx: &Ctx<'a>) -> Option<&'a Trace> {
        match side {
            SideRef::Block(i) => Some(self.known[job.tuple[i] as usize].get(ctx.obs)),
            SideRef::Outer(i) => Some(self.outer[i].get(ctx.obs)),
            SideRef::Nothing => None,
        }
    }

    /// The automaton of atom `a` for this job, or `None` while a side that
    /// needs its whole trace is still growing.
    fn automaton(
        &self,
        a: usize,
        job: &Job,
        ctx: &mut Ctx<'_>,
    ) -> Result<Option<Arc<PrefixAutomaton>>, MonitorError> {
        let spec = &ctx.table.atoms[a];
        if let Some(aut) = &spec.automaton {
            return Ok(Some(aut.clone()));
        }
        let traces = self.sides[a].map(|s| self.trace(s, job, ctx));
        let mut key = [None, None];
        for k in 0..2 {
            if spec.whole[k] {
                let t = traces[k].expect("a side reading its trace twice mentions a variable");
                if !t.is_terminated() {
                    return Ok(None);
                }
                key[k] = Some(t.id().clone());
            }
        }
        let cache_key = (a, key);
        if let Some(aut) = ctx.deferred.get(&cache_key) {
            return Ok(Some(aut.clone()));
        }
        let domain = ctx.domain;
        let fix = |tf: &TraceFormula, t: Option<&Trace>| match t {
            Some(t) => tf.substitute(&mut |proj, _| {
                Some(TraceFormula::word(
                    domain.project(t, proj).unwrap_or_default(),
                ))
            }),
            None => tf.clone(),
        };
        let lhs = if spec.whole[0] {
            fix(&spec.lhs, traces[0])
        } else {
            spec.lhs.clone()
        };
        let rhs = if spec.whole[1] {
            fix(&spec.rhs, traces[1])
        } else {
            spec.rhs.clone()
        };
        let aut =
            Arc::new(
                compile_atom(&lhs, &rhs, domain).map_err(|error| MonitorError::Compile {
                    atom: Formula::Leq(spec.lhs.clone(), spec.rhs.clone()).to_string(),
                    error,
                })?,
            );
        ctx.deferred.insert(cache_key, aut.clone());
        Ok(Some(aut))
    }

    /// Evaluates atoms in diagram order until the body is decided or every
    /// atom that matters waits for input.
    fn decide(&self, job: &mut Job, ctx: &mut Ctx<'_>) -> Result<Option<bool>, MonitorError> {
        let table = ctx.table;
        loop {
            let assign = |v: u32| match job.atoms[v as usize] {
                Slot::Done(b) => Some(b),
                _ => None,
            };
            if let Some(b) = table.bdd.eval_partial(self.root, &assign) {
                return Ok(Some(b));
            }
            let next = table.bdd.frontier(self.root, &assign);
            let mut changed = false;
            for a in next {
                let a = a as usize;
                if let Slot::Idle = job.atoms[a] {
                    match self.automaton(a, job, ctx)? {
                        Some(aut) => {
                            ctx.stats.atoms_started += 1;
                            job.atoms[a] = Slot::Run(AtomRun::new(aut));
                        }
                        None => continue,
                    }
                }
                let spec = &table.atoms[a];
                let tapes: [TapeView<'_>; 2] = core::array::from_fn(|k| {
                    if spec.whole[k] {
                        return TapeView::new(&[], true);
                    }
                    match self.trace(self.sides[a][k], job, ctx) {
                        Some(t) => TapeView::new(t.letters(), t.is_terminated()),
                        None => TapeView::new(&[] as &[Value], true),
                    }
                });
                let Slot::Run(run) = &mut job.atoms[a] else {
                    unreachable!()
                };
                let before = run.explored();
                let status = run.advance(tapes[0], tapes[1], ctx.domain);
                ctx.stats.atom_steps += 1;
                ctx.stats.configurations += run.explored() - before;
                match status {
                    AtomStatus::Accepted => job.atoms[a] = Slot::Done(true),
                    AtomStatus::Rejected => job.atoms[a] = Slot::Done(false),
                    AtomStatus::Pending => continue,
                }
                ctx.progress += 1;
                changed = true;
            }
            if !changed {
                return Ok(None);
            }
        }
    }
}
