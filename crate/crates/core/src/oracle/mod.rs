//! Brute-force reference semantics.
//!
//! Trace formulas are evaluated to explicit sets of words, quantifiers by
//! enumerating traces, and generators by calling plain functions. Everything
//! here favours obviousness over speed; the monitor is tested against it.
//!
//! Sets of words are finite except under `*`. Words longer than a cap are
//! not enumerated; the cap is exact for star-free formulas and otherwise
//! leaves [`Oracle::star_slack`] letters of room beyond the star-free parts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::formula::{Formula, TraceFormula, Var};
use crate::trace::{word, DataDomain, Trace, Valuation, Word};

pub mod random;

pub type GeneratorFn = dyn Fn(&[&Trace]) -> Vec<Trace> + Send + Sync;

/// Interpretation of generator names as functions from argument traces to
/// sets of traces.
#[derive(Clone, Default)]
pub struct GeneratorInterp {
    fns: BTreeMap<Arc<str>, Arc<GeneratorFn>>,
}

impl GeneratorInterp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(
        mut self,
        name: &str,
        f: impl Fn(&[&Trace]) -> Vec<Trace> + Send + Sync + 'static,
    ) -> Self {
        self.fns.insert(Arc::from(name), Arc::new(f));
        self
    }

    pub fn insert(&mut self, name: &str, f: Arc<GeneratorFn>) {
        self.fns.insert(Arc::from(name), f);
    }

    pub fn get(&self, name: &str) -> Option<&Arc<GeneratorFn>> {
        self.fns.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.fns.contains_key(name)
    }
}

impl fmt::Debug for GeneratorInterp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.fns.keys()).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    UnknownProjection(String),
    UnknownGenerator(String),
    Unbound(String),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::UnknownProjection(p) => write!(f, "unknown projection `{p}`"),
            OracleError::UnknownGenerator(g) => write!(f, "no interpretation for generator `{g}`"),
            OracleError::Unbound(v) => write!(f, "trace variable `{v}` is not bound"),
        }
    }
}

impl core::error::Error for OracleError {}

pub type Assignment = BTreeMap<Var, Arc<Trace>>;

/// Result of classifying an observation against all of its bounded extensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// Every explored extension satisfies the formula.
    Good,
    /// Every explored extension violates the formula.
    Bad,
    /// Extensions disagree within the explored bound.
    Inconclusive,
}

pub struct Oracle<'d> {
    domain: &'d DataDomain,
    pub star_slack: usize,
}

impl<'d> Oracle<'d> {
    pub fn new(domain: &'d DataDomain) -> Self {
        Oracle {
            domain,
            star_slack: 4,
        }
    }

    fn trace<'a>(&self, asg: &'a Assignment, var: &Var) -> Result<&'a Trace, OracleError> {
        asg.get(var)
            .map(|t| &**t)
            .ok_or_else(|| OracleError::Unbound(var.to_string()))
    }

    /// Length of the longest word, if the language is finite.
    fn max_len(&self, tf: &TraceFormula, asg: &Assignment) -> Result<Option<usize>, OracleError> {
        Ok(match tf {
            TraceFormula::Epsilon => Some(0),
            TraceFormula::Const(_) => Some(1),
            TraceFormula::Proj { var, .. } => Some(self.trace(asg, var)?.len()),
            TraceFormula::Slice(a, ..) | TraceFormula::StutterReduce(a) => self.max_len(a, asg)?,
            TraceFormula::Concat(a, b) => match (self.max_len(a, asg)?, self.max_len(b, asg)?) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            },
            TraceFormula::Union(a, b) => match (self.max_len(a, asg)?, self.max_len(b, asg)?) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            },
            TraceFormula::Star(_) => None,
        })
    }

    /// Star-free part of the length bound: stars count as empty.
    fn finite_part(&self, tf: &TraceFormula, asg: &Assignment) -> Result<usize, OracleError> {
        Ok(match tf {
            TraceFormula::Epsilon => 0,
            TraceFormula::Const(_) => 1,
            TraceFormula::Proj { var, .. } => self.trace(asg, var)?.len(),
            TraceFormula::Slice(a, ..) | TraceFormula::StutterReduce(a) => {
                self.finite_part(a, asg)?
            }
            TraceFormula::Concat(a, b) => self.finite_part(a, asg)? + self.finite_part(b, asg)?,
            TraceFormula::Union(a, b) => self.finite_part(a, asg)?.max(self.finite_part(b, asg)?),
            TraceFormula::Star(a) => {
                let _ = self.finite_part(a, asg)?;
                0
            }
        })
    }

    fn inner_cap(
        &self,
        tf: &TraceFormula,
        asg: &Assignment,
        cap: usize,
    ) -> Result<usize, OracleError> {
        Ok(match self.max_len(tf, asg)? {
            Some(n) => n,
            None => cap.max(self.finite_part(tf, asg)?) + self.star_slack,
        })
    }

    /// Words of the language of `tf` with at most `cap` letters. With
    /// `truncate`, longer words contribute their `cap`-letter prefix instead
    /// of being dropped (enough to decide "is a prefix of some word").
    pub fn words(
        &self,
        tf: &TraceFormula,
        asg: &Assignment,
        cap: usize,
        truncate: bool,
    ) -> Result<BTreeSet<Word>, OracleError> {
        let fit = |mut w: Word| -> Option<Word> {
            if w.len() <= cap {
                Some(w)
            } else if truncate {
                w.truncate(cap);
                Some(w)
            } else {
                None
            }
        };
        Ok(match tf {
            TraceFormula::Epsilon => [Word::new()].into_iter().collect(),
            TraceFormula::Const(c) => fit(alloc::vec![c.clone()]).into_iter().collect(),
            TraceFormula::Proj { proj, var } => {
                let t = self.trace(asg, var)?;
                let w = self
                    .domain
                    .project(t, proj)
                    .map_err(|e| OracleError::UnknownProjection(e.0))?;
                fit(w).into_iter().collect()
            }
            TraceFormula::Slice(a, i, j) => {
                let inner = self.inner_cap(a, asg, cap)?;
                self.words(a, asg, inner, false)?
                    .iter()
                    .filter_map(|w| fit(word::slice(w, *i, *j).to_vec()))
                    .collect()
            }
            TraceFormula::StutterReduce(a) => {
                let inner = self.inner_cap(a, asg, cap)?;
                self.words(a, asg, inner, false)?
                    .iter()
                    .filter_map(|w| fit(word::stutter_reduce(w)))
                    .collect()
            }
            TraceFormula::Concat(a, b) => {
                let left = self.words(a, asg, cap, truncate)?;
                let right = self.words(b, asg, cap, truncate)?;
                let mut out = BTreeSet::new();
                for x in &left {
                    if truncate && x.len() == cap {
                        out.insert(x.clone());
                        continue;
                    }
                    for y in &right {
                        let mut w = x.clone();
                        w.extend(y.iter().cloned());
                        if let Some(w) = fit(w) {
                            out.insert(w);
                        }
                    }
                }
                out
            }
            TraceFormula::Union(a, b) => {
                let mut s = self.words(a, asg, cap, truncate)?;
                s.extend(self.words(b, asg, cap, truncate)?);
                s
            }
            TraceFormula::Star(a) => {
                let base = self.words(a, asg, cap, truncate)?;
                let mut all: BTreeSet<Word> = [Word::new()].into_iter().collect();
                let mut frontier: Vec<Word> = alloc::vec![Word::new()];
                while let Some(x) = frontier.pop() {
                    if x.len() >= cap {
                        continue;
                    }
                    for y in &base {
                        if y.is_empty() {
                            continue;
                        }
                        let mut w = x.clone();
                        w.extend(y.iter().cloned());
                        if let Some(w) = fit(w) {
                            if all.insert(w.clone()) {
                                frontier.push(w);
                            }
                        }
                    }
                }
                all
            }
        })
    }

    /// `lhs <= rhs` under the assignment.
    pub fn atom(
        &self,
        lhs: &TraceFormula,
        rhs: &TraceFormula,
        asg: &Assignment,
    ) -> Result<bool, OracleError> {
        let cap = match (self.max_len(lhs, asg)?, self.max_len(rhs, asg)?) {
            (Some(a), Some(b)) => a.max(b),
            _ => self.finite_part(lhs, asg)?.max(self.finite_part(rhs, asg)?) + self.star_slack,
        };
        let left = self.words(lhs, asg, cap, false)?;
        let right = self.words(rhs, asg, cap, true)?;
        Ok(left
            .iter()
            .any(|w1| right.iter().any(|w2| word::is_prefix(w1, w2))))
    }

    /// Truth of a closed formula over the traces.
    pub fn eval(
        &self,
        phi: &Formula,
        traces: &[Trace],
        sigma: &GeneratorInterp,
    ) -> Result<bool, OracleError> {
        let pool: Vec<Arc<Trace>> = traces.iter().cloned().map(Arc::new).collect();
        self.eval_with(phi, &pool, sigma, &Assignment::new())
    }

    pub fn eval_with(
        &self,
        phi: &Formula,
        traces: &[Arc<Trace>],
        sigma: &GeneratorInterp,
        asg: &Assignment,
    ) -> Result<bool, OracleError> {
        match phi {
            Formula::Exists { var, body } => {
                for t in traces {
                    let mut next = asg.clone();
                    next.insert(var.clone(), t.clone());
                    if self.eval_with(body, traces, sigma, &next)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::ExistsIn {
                var,
                generator,
                args,
                body,
            } => {
                for t in self.generate(generator, args, sigma, asg)? {
                    let mut next = asg.clone();
                    next.insert(var.clone(), Arc::new(t));
                    if self.eval_with(body, traces, sigma, &next)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Not(a) => Ok(!self.eval_with(a, traces, sigma, asg)?),
            Formula::And(a, b) => {
                Ok(self.eval_with(a, traces, sigma, asg)?
                    && self.eval_with(b, traces, sigma, asg)?)
            }
            Formula::Leq(a, b) => self.atom(a, b, asg),
        }
    }

    fn generate(
        &self,
        generator: &str,
        args: &[Var],
        sigma: &GeneratorInterp,
        asg: &Assignment,
    ) -> Result<Vec<Trace>, OracleError> {
        let f = sigma
            .get(generator)
            .ok_or_else(|| OracleError::UnknownGenerator(generator.into()))?;
        let arg_traces = args
            .iter()
            .map(|a| self.trace(asg, a))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(f(&arg_traces))
    }

    /// Checks the correctness condition of generator `f` for the quantifier
    /// `Q var ∈ f(args). body` against the specification function `spec`,
    /// for every assignment of the body's other free variables to `traces`.
    ///
    /// Existential quantifiers need: every generated trace satisfying the
    /// body is matched by a specification trace that satisfies it too.
    /// Universal quantifiers need the converse.
    #[allow(clippy::too_many_arguments)]
    pub fn generator_correct(
        &self,
        universal: bool,
        var: &Var,
        args: &[Var],
        body: &Formula,
        f: &GeneratorFn,
        spec: &GeneratorFn,
        traces: &[Trace],
        sigma: &GeneratorInterp,
    ) -> Result<bool, OracleError> {
        let pool: Vec<Arc<Trace>> = traces.iter().cloned().map(Arc::new).collect();
        let mut others: Vec<Var> = body.free_vars().into_iter().filter(|v| v != var).collect();
        for a in args {
            if !others.contains(a) {
                others.push(a.clone());
            }
        }
        let mut ok = true;
        for_each_assignment(&others, &pool, &mut |asg| {
            if !ok {
                return Ok(());
            }
            let arg_traces: Vec<&Trace> = args.iter().map(|a| &*asg[a]).collect();
            let generated = f(&arg_traces);
            let specified = spec(&arg_traces);
            let sat = |t: &Trace| -> Result<bool, OracleError> {
                let mut next = asg.clone();
                next.insert(var.clone(), Arc::new(t.clone()));
                self.eval_with(body, &pool, sigma, &next)
            };
            let (from, to) = if universal {
                (&specified, &generated)
            } else {
                (&generated, &specified)
            };
            for a in from {
                let premise = sat(a)?;
                let mut matched = false;
                for b in to {
                    if !premise || sat(b)? {
                        matched = true;
                        break;
                    }
                }
                if !matched {
                    ok = false;
                    return Ok(());
                }
            }
            Ok(())
        })?;
        Ok(ok)
    }

    /// Classifies an observation by evaluating the formula on every
    /// extension in which each non-terminated trace grows by at most
    /// `extra_events` letters from `alphabet` and, if the observation is
    /// open, at most `extra_traces` new traces of at most `extra_events`
    /// letters are added.
    #[allow(clippy::too_many_arguments)]
    pub fn classify(
        &self,
        phi: &Formula,
        traces: &[Trace],
        closed: bool,
        sigma: &GeneratorInterp,
        alphabet: &[Valuation],
        extra_events: usize,
        extra_traces: usize,
    ) -> Result<Classification, OracleError> {
        let mut words: Vec<Vec<Valuation>> = alloc::vec![Vec::new()];
        let mut layer: Vec<Vec<Valuation>> = alloc::vec![Vec::new()];
        for _ in 0..extra_events {
            let mut next = Vec::new();
            for w in &layer {
                for a in alphabet {
                    let mut x = w.clone();
                    x.push(a.clone());
                    next.push(x);
                }
            }
            words.extend(next.iter().cloned());
            layer = next;
        }
        let open: Vec<usize> = (0..traces.len())
            .filter(|&i| !traces[i].is_terminated())
            .collect();
        let new_traces = if closed { 0 } else { extra_traces };
        let (mut seen_true, mut seen_false) = (false, false);
        // choice[k] indexes `words` for every open trace, then for every
        // new trace (with one extra slot meaning "not added").
        let slots = open.len() + new_traces;
        let mut choice = alloc::vec![0usize; slots];
        loop {
            let mut ext: Vec<Trace> = traces.to_vec();
            for (k, &i) in open.iter().enumerate() {
                for ev in &words[choice[k]] {
                    ext[i].push(ev.clone()).ok();
                }
                ext[i].terminate();
            }
            for k in 0..new_traces {
                let c = choice[open.len() + k];
                if c < words.len() {
                    ext.push(Trace::complete(
                        &alloc::format!("__ext{k}"),
                        words[c].iter().cloned(),
                    ));
                }
            }
            if self.eval(phi, &ext, sigma)? {
                seen_true = true;
            } else {
                seen_false = true;
            }
            if seen_true && seen_false {
                return Ok(Classification::Inconclusive);
            }
            let mut k = 0;
            loop {
                if k == slots {
                    return Ok(if seen_true {
                        Classification::Good
                    } else {
                        Classification::Bad
                    });
                }
                let limit = if k < open.len() {
                    words.len()
                } else {
                    words.len() + 1
                };
                choice[k] += 1;
                if choice[k] < limit {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }
}

/// Calls `f` with every assignment of `vars` to traces of `pool`.
pub fn for_each_assignment(
    vars: &[Var],
    pool: &[Arc<Trace>],
    f: &mut dyn FnMut(&Assignment) -> Result<(), OracleError>,
) -> Result<(), OracleError> {
    fn go(
        vars: &[Var],
        pool: &[Arc<Trace>],
        asg: &mut Assignment,
        f: &mut dyn FnMut(&Assignment) -> Result<(), OracleError>,
    ) -> Result<(), OracleError> {
        match vars.split_first() {
            None => f(asg),
            Some((v, rest)) => {
                for t in pool {
                    asg.insert(v.clone(), t.clone());
                    go(rest, pool, asg, f)?;
                }
                asg.remove(v);
                Ok(())
            }
        }
    }
    go(vars, pool, &mut Assignment::new(), f)
}

/// Drops the generators that `sigma` does not interpret, turning their
/// quantifiers into quantifiers over observed traces.
pub fn passive(phi: &Formula, sigma: &GeneratorInterp) -> Formula {
    match phi {
        Formula::ExistsIn {
            var,
            generator,
            args,
            body,
        } => {
            let body = alloc::boxed::Box::new(passive(body, sigma));
            if sigma.contains(generator) {
                Formula::ExistsIn {
                    var: var.clone(),
                    generator: generator.clone(),
                    args: args.clone(),
                    body,
                }
            } else {
                Formula::Exists {
                    var: var.clone(),
                    body,
                }
            }
        }
        Formula::Exists { var, body } => Formula::Exists {
            var: var.clone(),
            body: alloc::boxed::Box::new(passive(body, sigma)),
        },
        Formula::Not(a) => Formula::Not(alloc::boxed::Box::new(passive(a, sigma))),
        Formula::And(a, b) => Formula::and(passive(a, sigma), passive(b, sigma)),
        Formula::Leq(..) => phi.clone(),
    }
}
