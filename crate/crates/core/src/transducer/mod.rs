//! Symbolic register transducers and the two-tape automata built from them.
//!
//! A trace formula with one trace variable denotes a relation between the
//! trace (the input tape) and the words it can produce (the output). Each
//! syntactic form has a transducer; regular operators combine them and
//! slicing / stutter reduction are applied by sequential composition. A
//! prefix atom `lhs <= rhs` becomes a two-tape automaton that reads the
//! left and right traces and accepts when some output of the left side is
//! a prefix of some output of the right side.
//!
//! Letters, registers and constants are compared through constraints; a
//! small decision procedure prunes transitions whose constraints cannot be
//! satisfied.

mod build;
mod compose;
mod constraint;
mod dump;
mod epsilon;
mod product;
pub mod reference;
mod run;
pub mod stats;

use alloc::vec::Vec;
use core::fmt;

use crate::trace::{ProjId, Value};

pub use build::{
    concat, constant, emitter, from_regex, identity_transducer, projection_transducer, skip_all,
    slice_transducer, star, stutter_transducer, total_slice_transducer, translate, union,
};
pub use compose::compose_sequential;
pub use constraint::Env;
pub use dump::Named;
pub use epsilon::{eliminate_epsilon, prune};
pub use product::{
    compile_atom, needs_whole_trace, product, LeftDone, PaKind, PaState, PaTransition,
    PrefixAutomaton,
};
pub use run::{AtomRun, AtomStatus, TapeView};

/// Which input tape a letter is read from. Single-tape transducers only
/// use `Left`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tape {
    Left,
    Right,
}

impl Tape {
    pub fn index(self) -> usize {
        match self {
            Tape::Left => 0,
            Tape::Right => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    /// The letter being read from a tape.
    Letter(Tape),
    Reg(u32),
    Const(Value),
}

/// A base value with projections applied in order (innermost first).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub base: Base,
    pub projs: Vec<ProjId>,
}

impl Term {
    pub fn letter() -> Term {
        Term::on(Tape::Left)
    }

    pub fn on(tape: Tape) -> Term {
        Term {
            base: Base::Letter(tape),
            projs: Vec::new(),
        }
    }

    pub fn reg(r: u32) -> Term {
        Term {
            base: Base::Reg(r),
            projs: Vec::new(),
        }
    }

    pub fn constant(v: Value) -> Term {
        Term {
            base: Base::Const(v),
            projs: Vec::new(),
        }
    }

    pub fn then(mut self, p: ProjId) -> Term {
        self.projs.push(p);
        self
    }

    /// Whether the term can evaluate to the empty word.
    pub fn may_be_eps(&self) -> bool {
        !self.projs.is_empty() || matches!(self.base, Base::Reg(_))
    }

    pub fn reads(&self, tape: Tape) -> bool {
        self.base == Base::Letter(tape)
    }

    pub fn reads_any_letter(&self) -> bool {
        matches!(self.base, Base::Letter(_))
    }

    /// Replaces the base by `f(base)`, keeping this term's projections on
    /// top of the replacement's.
    pub fn map_base(&self, f: &mut impl FnMut(&Base) -> Term) -> Term {
        let mut t = f(&self.base);
        t.projs.extend(self.projs.iter().copied());
        t
    }

    /// The term without its outermost projection.
    pub fn parent(&self) -> Option<Term> {
        if self.projs.is_empty() {
            None
        } else {
            Some(Term {
                base: self.base.clone(),
                projs: self.projs[..self.projs.len() - 1].to_vec(),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Eq(Term, Term),
    Neq(Term, Term),
    IsEps(Term),
    NotEps(Term),
}

impl Atom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Eq(a, b) | Atom::Neq(a, b) => alloc::vec![a, b],
            Atom::IsEps(a) | Atom::NotEps(a) => alloc::vec![a],
        }
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Atom {
        match self {
            Atom::Eq(a, b) => Atom::Eq(f(a), f(b)),
            Atom::Neq(a, b) => Atom::Neq(f(a), f(b)),
            Atom::IsEps(a) => Atom::IsEps(f(a)),
            Atom::NotEps(a) => Atom::NotEps(f(a)),
        }
    }

    /// The atom that holds exactly when this one does not.
    pub fn complement(&self) -> Atom {
        match self {
            Atom::Eq(a, b) => Atom::Neq(a.clone(), b.clone()),
            Atom::Neq(a, b) => Atom::Eq(a.clone(), b.clone()),
            Atom::IsEps(a) => Atom::NotEps(a.clone()),
            Atom::NotEps(a) => Atom::IsEps(a.clone()),
        }
    }
}

/// A conjunction of atoms; the empty conjunction is `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint(pub Vec<Atom>);

impl Constraint {
    pub fn tt() -> Self {
        Constraint(Vec::new())
    }

    pub fn of(atoms: impl IntoIterator<Item = Atom>) -> Self {
        let mut c = Constraint(atoms.into_iter().collect());
        c.normalize();
        c
    }

    pub fn is_true(&self) -> bool {
        self.0.is_empty()
    }

    pub fn and(&self, other: &Constraint) -> Constraint {
        let mut atoms = self.0.clone();
        atoms.extend(other.0.iter().cloned());
        Constraint::of(atoms)
    }

    pub fn with(&self, atom: Atom) -> Constraint {
        let mut atoms = self.0.clone();
        atoms.push(atom);
        Constraint::of(atoms)
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Constraint {
        Constraint::of(self.0.iter().map(|a| a.map_terms(f)))
    }

    fn normalize(&mut self) {
        self.0.retain(|a| match a {
            Atom::Eq(x, y) => x != y,
            _ => true,
        });
        self.0.sort();
        self.0.dedup();
    }

    pub fn mentions_letter(&self) -> bool {
        self.0
            .iter()
            .any(|a| a.terms().iter().any(|t| t.reads_any_letter()))
    }
}

/// `reg := value`, applied in parallel with the other updates of a
/// transition (all right-hand sides see the registers before the step).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Update {
    pub reg: u32,
    pub value: Term,
}

/// A transition of a single-tape transducer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    /// Whether a letter is consumed.
    pub input: bool,
    pub guard: Constraint,
    pub updates: Vec<Update>,
    /// The emitted letter, or nothing.
    pub output: Option<Term>,
}

impl Transition {
    pub fn is_eps_eps(&self) -> bool {
        !self.input && self.output.is_none()
    }
}

/// A symbolic register transducer over one input tape.
///
/// A state is accepting when one of its final guards (constraints over the
/// registers) holds; an empty list means the state is not final.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transducer {
    pub states: usize,
    pub initial: usize,
    pub registers: u32,
    pub finals: Vec<Vec<Constraint>>,
    pub transitions: Vec<Transition>,
}

impl Transducer {
    /// A transducer with `states` states, none final, no transitions.
    pub fn with_states(states: usize) -> Self {
        Transducer {
            states,
            initial: 0,
            registers: 0,
            finals: alloc::vec![Vec::new(); states],
            transitions: Vec::new(),
        }
    }

    pub fn add_state(&mut self) -> usize {
        self.states += 1;
        self.finals.push(Vec::new());
        self.states - 1
    }

    pub fn set_final(&mut self, q: usize) {
        self.finals[q] = alloc::vec![Constraint::tt()];
    }

    pub fn is_final_unconditionally(&self, q: usize) -> bool {
        self.finals[q].iter().any(Constraint::is_true)
    }

    pub fn outgoing(&self, q: usize) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.from == q)
    }

    pub fn has_eps_eps(&self) -> bool {
        self.transitions.iter().any(Transition::is_eps_eps)
    }

    /// Checks the structural invariants: letters only occur on transitions
    /// that read, and indices are in range.
    pub fn check(&self) -> Result<(), &'static str> {
        if self.finals.len() != self.states || self.initial >= self.states.max(1) {
            return Err("state count mismatch");
        }
        for t in &self.transitions {
            if t.from >= self.states || t.to >= self.states {
                return Err("transition endpoint out of range");
            }
            let letter_used = t.guard.mentions_letter()
                || t.updates.iter().any(|u| u.value.reads_any_letter())
                || t.output.as_ref().is_some_and(Term::reads_any_letter);
            if letter_used && !t.input {
                return Err("letter used on a transition that reads nothing");
            }
            if t.updates.iter().any(|u| u.reg >= self.registers) {
                return Err("register out of range");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompileError {
    /// A trace formula that mentions a trace variable was given where none is allowed.
    NotVariableFree,
    /// A side mentions more than one trace variable or one under `*`.
    NotSimple,
    /// A side concatenates two parts that both read the trace; it must be
    /// compiled once the trace is complete.
    NeedsWholeTrace,
    UnknownProjection(alloc::string::String),
    /// An operand of sequential composition has a transition that neither
    /// reads nor writes.
    EpsilonStep,
}

impl fmt::Display for CompileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompileError::NotVariableFree => {
                f.write_str("expected a trace formula without trace variables")
            }
            CompileError::NotSimple => f.write_str("atom side is not simple"),
            CompileError::NeedsWholeTrace => {
                f.write_str("atom side reads its trace more than once in sequence")
            }
            CompileError::UnknownProjection(p) => write!(f, "unknown projection `{p}`"),
            CompileError::EpsilonStep => {
                f.write_str("composition operand has a transition with neither input nor output")
            }
        }
    }
}

impl core::error::Error for CompileError {}
