//! The formula language: trace formulas (regular expressions over projected
//! traces), quantified prefix formulas, a parser and a printer.

pub mod library;
mod parse;
mod prenex;
mod print;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::trace::Value;

pub use parse::{parse_formula, parse_formula_in, parse_trace_formula, ParseError};
pub use prenex::{FragmentError, Polarity, Prenex, Quantifier, QuantifierBlock, Source};

pub type Var = Arc<str>;

/// A regular expression over projected traces and constants.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TraceFormula {
    Epsilon,
    Const(Value),
    /// `proj(var)`: the named projection of the trace bound to `var`.
    Proj {
        proj: Arc<str>,
        var: Var,
    },
    /// `ψ[i:j]`, inclusive, negative indices count from the end.
    Slice(Box<TraceFormula>, i64, i64),
    Concat(Box<TraceFormula>, Box<TraceFormula>),
    Union(Box<TraceFormula>, Box<TraceFormula>),
    Star(Box<TraceFormula>),
    /// Stutter reduction: every run of equal letters becomes one letter.
    StutterReduce(Box<TraceFormula>),
}

impl TraceFormula {
    pub fn constant(v: impl Into<Value>) -> Self {
        TraceFormula::Const(v.into())
    }

    pub fn proj(proj: &str, var: &str) -> Self {
        TraceFormula::Proj {
            proj: Arc::from(proj),
            var: Arc::from(var),
        }
    }

    pub fn concat(a: TraceFormula, b: TraceFormula) -> Self {
        TraceFormula::Concat(Box::new(a), Box::new(b))
    }

    pub fn union(a: TraceFormula, b: TraceFormula) -> Self {
        TraceFormula::Union(Box::new(a), Box::new(b))
    }

    pub fn star(a: TraceFormula) -> Self {
        TraceFormula::Star(Box::new(a))
    }

    pub fn slice(a: TraceFormula, i: i64, j: i64) -> Self {
        TraceFormula::Slice(Box::new(a), i, j)
    }

    pub fn stutter(a: TraceFormula) -> Self {
        TraceFormula::StutterReduce(Box::new(a))
    }

    /// A word of constants, `ε` when empty.
    pub fn word(letters: impl IntoIterator<Item = Value>) -> Self {
        letters
            .into_iter()
            .map(TraceFormula::Const)
            .reduce(TraceFormula::concat)
            .unwrap_or(TraceFormula::Epsilon)
    }

    pub fn children(&self) -> Vec<&TraceFormula> {
        match self {
            TraceFormula::Epsilon | TraceFormula::Const(_) | TraceFormula::Proj { .. } => {
                Vec::new()
            }
            TraceFormula::Slice(a, _, _)
            | TraceFormula::Star(a)
            | TraceFormula::StutterReduce(a) => {
                alloc::vec![&**a]
            }
            TraceFormula::Concat(a, b) | TraceFormula::Union(a, b) => alloc::vec![&**a, &**b],
        }
    }

    /// Trace variables mentioned, in order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        if let TraceFormula::Proj { var, .. } = self {
            if !out.contains(var) {
                out.push(var.clone());
            }
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    /// Number of `proj(var)` occurrences.
    pub fn proj_occurrences(&self) -> usize {
        match self {
            TraceFormula::Proj { .. } => 1,
            _ => self.children().iter().map(|c| c.proj_occurrences()).sum(),
        }
    }

    pub fn has_var_under_star(&self) -> bool {
        match self {
            TraceFormula::Star(a) => !a.vars().is_empty(),
            _ => self.children().iter().any(|c| c.has_var_under_star()),
        }
    }

    pub fn has_star(&self) -> bool {
        match self {
            TraceFormula::Star(_) => true,
            _ => self.children().iter().any(|c| c.has_star()),
        }
    }

    /// Simple trace formulas mention at most one trace variable and none
    /// under a star.
    pub fn is_simple(&self) -> bool {
        self.vars().len() <= 1 && !self.has_var_under_star()
    }

    /// Projection names used.
    pub fn projections(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_projections(&mut out);
        out
    }

    fn collect_projections(&self, out: &mut BTreeSet<Arc<str>>) {
        if let TraceFormula::Proj { proj, .. } = self {
            out.insert(proj.clone());
        }
        for c in self.children() {
            c.collect_projections(out);
        }
    }

    /// Replaces every `proj(var)` by the given formula (used to substitute
    /// a concrete word once a trace is known).
    pub fn substitute(
        &self,
        f: &mut impl FnMut(&str, &Var) -> Option<TraceFormula>,
    ) -> TraceFormula {
        match self {
            TraceFormula::Proj { proj, var } => f(proj, var).unwrap_or_else(|| self.clone()),
            TraceFormula::Epsilon | TraceFormula::Const(_) => self.clone(),
            TraceFormula::Slice(a, i, j) => TraceFormula::slice(a.substitute(f), *i, *j),
            TraceFormula::Star(a) => TraceFormula::star(a.substitute(f)),
            TraceFormula::StutterReduce(a) => TraceFormula::stutter(a.substitute(f)),
            TraceFormula::Concat(a, b) => TraceFormula::concat(a.substitute(f), b.substitute(f)),
            TraceFormula::Union(a, b) => TraceFormula::union(a.substitute(f), b.substitute(f)),
        }
    }
}

/// A prefix formula over quantified traces.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    /// `∃ var. body` over the observed traces.
    Exists {
        var: Var,
        body: Box<Formula>,
    },
    /// `∃ var ∈ generator(args). body`.
    ExistsIn {
        var: Var,
        generator: Arc<str>,
        args: Vec<Var>,
        body: Box<Formula>,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    /// Some word of the left side is a prefix of some word of the right side.
    Leq(TraceFormula, TraceFormula),
}

impl Formula {
    pub fn tt() -> Self {
        Formula::Leq(TraceFormula::Epsilon, TraceFormula::Epsilon)
    }

    pub fn ff() -> Self {
        Formula::not(Formula::tt())
    }

    /// Negation that removes double negations.
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        match f {
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    pub fn leq(a: TraceFormula, b: TraceFormula) -> Self {
        Formula::Leq(a, b)
    }

    pub fn eq(a: TraceFormula, b: TraceFormula) -> Self {
        Formula::and(Formula::Leq(a.clone(), b.clone()), Formula::Leq(b, a))
    }

    /// `⌊a⌋ ≤ ⌊b⌋`.
    pub fn stutter_leq(a: TraceFormula, b: TraceFormula) -> Self {
        Formula::Leq(TraceFormula::stutter(a), TraceFormula::stutter(b))
    }

    pub fn stutter_eq(a: TraceFormula, b: TraceFormula) -> Self {
        Formula::eq(TraceFormula::stutter(a), TraceFormula::stutter(b))
    }

    pub fn exists(var: &str, body: Formula) -> Self {
        Formula::Exists {
            var: Arc::from(var),
            body: Box::new(body),
        }
    }

    pub fn forall(var: &str, body: Formula) -> Self {
        Formula::not(Formula::exists(var, Formula::not(body)))
    }

    pub fn exists_in(var: &str, generator: &str, args: &[&str], body: Formula) -> Self {
        Formula::ExistsIn {
            var: Arc::from(var),
            generator: Arc::from(generator),
            args: args.iter().map(|a| Arc::from(*a)).collect(),
            body: Box::new(body),
        }
    }

    pub fn forall_in(var: &str, generator: &str, args: &[&str], body: Formula) -> Self {
        Formula::not(Formula::exists_in(var, generator, args, Formula::not(body)))
    }

    /// Negation, normalised so that negating twice gives back the original
    /// formula.
    pub fn negate(&self) -> Formula {
        Formula::not(self.clone())
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        match self {
            Formula::Exists { var, body } => {
                let mut s = body.free_vars();
                s.remove(var);
                s
            }
            Formula::ExistsIn {
                var, args, body, ..
            } => {
                let mut s = body.free_vars();
                s.remove(var);
                s.extend(args.iter().cloned());
                s
            }
            Formula::Not(a) => a.free_vars(),
            Formula::And(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            Formula::Leq(a, b) => a.vars().into_iter().chain(b.vars()).collect(),
        }
    }

    /// Quantified variables in order of quantification (with repeats if a
    /// variable is quantified twice).
    pub fn bound_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_bound(&mut out);
        out
    }

    fn collect_bound(&self, out: &mut Vec<Var>) {
        match self {
            Formula::Exists { var, body } | Formula::ExistsIn { var, body, .. } => {
                out.push(var.clone());
                body.collect_bound(out);
            }
            Formula::Not(a) => a.collect_bound(out),
            Formula::And(a, b) => {
                a.collect_bound(out);
                b.collect_bound(out);
            }
            Formula::Leq(..) => {}
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Exists { .. } | Formula::ExistsIn { .. } => false,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Formula::Leq(..) => true,
        }
    }

    /// The prefix atoms `(lhs, rhs)` in order of first occurrence, without
    /// duplicates.
    pub fn atoms(&self) -> Vec<(&TraceFormula, &TraceFormula)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(&'a TraceFormula, &'a TraceFormula)>) {
        match self {
            Formula::Exists { body, .. } | Formula::ExistsIn { body, .. } => {
                body.collect_atoms(out)
            }
            Formula::Not(a) => a.collect_atoms(out),
            Formula::And(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::Leq(a, b) => {
                if !out.iter().any(|(x, y)| *x == a && *y == b) {
                    out.push((a, b));
                }
            }
        }
    }

    /// Generator names used, with their argument counts.
    pub fn generators(&self) -> Vec<(Arc<str>, usize)> {
        let mut out = Vec::new();
        self.collect_generators(&mut out);
        out
    }

    fn collect_generators(&self, out: &mut Vec<(Arc<str>, usize)>) {
        match self {
            Formula::ExistsIn {
                generator,
                args,
                body,
                ..
            } => {
                let entry = (generator.clone(), args.len());
                if !out.contains(&entry) {
                    out.push(entry);
                }
                body.collect_generators(out);
            }
            Formula::Exists { body, .. } => body.collect_generators(out),
            Formula::Not(a) => a.collect_generators(out),
            Formula::And(a, b) => {
                a.collect_generators(out);
                b.collect_generators(out);
            }
            Formula::Leq(..) => {}
        }
    }
}

impl core::fmt::Display for TraceFormula {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        print::write_trace_formula(f, self, 0)
    }
}

impl core::fmt::Display for Formula {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        print::write_formula(f, self)
    }
}
