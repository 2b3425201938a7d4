//! Two-tape prefix automata for atoms `lhs <= rhs`.

use alloc::vec::Vec;

use super::build::translate;
use super::compose::{output_cases, StateMap};
use super::constraint::{disjunction_valid, satisfiable};
use super::epsilon::eliminate_epsilon;
use super::stats::{hit, Rule};
use super::{Atom, Base, CompileError, Constraint, Tape, Term, Transducer, Update};
use crate::formula::TraceFormula;
use crate::trace::DataDomain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PaKind {
    /// Both transducers running in lockstep on their outputs.
    Pair(usize, usize),
    /// The left transducer has accepted; the right one still has to accept
    /// the rest of its tape.
    Tail(usize),
    /// The atom holds whatever comes next.
    Accept,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaTransition {
    /// Which tapes advance by one letter.
    pub reads: [bool; 2],
    pub guard: Constraint,
    pub updates: Vec<Update>,
    pub to: usize,
}

/// Leaving the lockstep phase once the left side is finished.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeftDone {
    pub guard: Constraint,
    pub to: usize,
    /// Usable before the left tape ends: the left transducer accepts every
    /// continuation without further output.
    pub eager: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaState {
    pub kind: PaKind,
    pub transitions: Vec<PaTransition>,
    pub left_done: Vec<LeftDone>,
    /// In `Tail` states: guards under which the right tape may end here.
    pub accepting: Vec<Constraint>,
}

/// Accepts a pair of tapes `(u, v)` when some output of the left
/// transducer on `u` is a prefix of some output of the right transducer on
/// `v`. Terms read `Letter(Left)` for `u` and `Letter(Right)` for `v`;
/// the right transducer's registers follow the left's.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixAutomaton {
    pub registers: u32,
    pub initial: usize,
    pub states: Vec<PaState>,
}

impl PrefixAutomaton {
    pub fn live_states(&self) -> usize {
        self.states.len()
    }

    pub fn transition_count(&self) -> usize {
        self.states
            .iter()
            .map(|s| s.transitions.len() + s.left_done.len())
            .sum()
    }
}

/// Whether `tf` concatenates two parts that both read the trace. Such a
/// side cannot be compiled to a one-pass transducer over the trace.
pub fn needs_whole_trace(tf: &TraceFormula) -> bool {
    match tf {
        TraceFormula::Concat(a, b) if !a.vars().is_empty() && !b.vars().is_empty() => true,
        _ => tf.children().into_iter().any(needs_whole_trace),
    }
}

/// Compiles `lhs <= rhs`. Each side must be simple and read its trace at
/// most once in sequence.
pub fn compile_atom(
    lhs: &TraceFormula,
    rhs: &TraceFormula,
    domain: &DataDomain,
) -> Result<PrefixAutomaton, CompileError> {
    for side in [lhs, rhs] {
        if !side.is_simple() {
            return Err(CompileError::NotSimple);
        }
        if needs_whole_trace(side) {
            return Err(CompileError::NeedsWholeTrace);
        }
    }
    let t1 = eliminate_epsilon(&translate(lhs, domain)?, domain);
    let t2 = eliminate_epsilon(&translate(rhs, domain)?, domain);
    Ok(product(&t1, &t2, domain))
}

fn to_right(t: &Term, regs: u32) -> Term {
    t.map_base(&mut |b| match b {
        Base::Letter(_) => Term::on(Tape::Right),
        Base::Reg(r) => Term::reg(r + regs),
        other => Term {
            base: other.clone(),
            projs: Vec::new(),
        },
    })
}

/// States from which every remaining input is accepted: unconditionally
/// final, and every letter can be read by some transition into the set
/// (whatever the registers hold). With `silent`, those transitions must
/// not emit.
fn universal(t: &Transducer, silent: bool) -> Vec<bool> {
    let mut set: Vec<bool> = (0..t.states)
        .map(|q| t.is_final_unconditionally(q))
        .collect();
    loop {
        let mut changed = false;
        for q in 0..t.states {
            if !set[q] {
                continue;
            }
            let guards: Vec<Constraint> = t
                .outgoing(q)
                .filter(|tr| tr.input && set[tr.to] && (!silent || tr.output.is_none()))
                .map(|tr| tr.guard.clone())
                .collect();
            if !disjunction_valid(&guards) {
                set[q] = false;
                changed = true;
            }
        }
        if !changed {
            return set;
        }
    }
}

/// The prefix automaton of two ε/ε-free single-tape transducers.
pub fn product(t1: &Transducer, t2: &Transducer, domain: &DataDomain) -> PrefixAutomaton {
    let r1 = t1.registers;
    let mut right = t2.clone();
    for tr in &mut right.transitions {
        tr.guard = tr.guard.map_terms(&mut |x| to_right(x, r1));
        for u in &mut tr.updates {
            u.reg += r1;
            u.value = to_right(&u.value, r1);
        }
        tr.output = tr.output.as_ref().map(|o| to_right(o, r1));
    }
    for gs in &mut right.finals {
        for g in gs.iter_mut() {
            *g = g.map_terms(&mut |x| to_right(x, r1));
        }
    }
    let univ2 = universal(&right, false);
    let silent1 = universal(t1, true);

    let mut ids: StateMap<PaKind> = StateMap::default();
    let initial = ids.id(PaKind::Pair(t1.initial, t2.initial));
    let mut built: Vec<Option<PaState>> = Vec::new();
    let sat = |c: &Constraint| satisfiable(c, domain);
    while let Some((kind, id)) = ids.next() {
        let mut st = PaState {
            kind,
            transitions: Vec::new(),
            left_done: Vec::new(),
            accepting: Vec::new(),
        };
        match kind {
            PaKind::Pair(q1, q2) => {
                for a in t1.outgoing(q1) {
                    for (e1, o1) in output_cases(a) {
                        let g1 = match e1 {
                            Some(x) => a.guard.with(x),
                            None => a.guard.clone(),
                        };
                        let Some(o1) = o1 else {
                            if sat(&g1) {
                                hit(Rule::ProductLeftEps);
                                st.transitions.push(PaTransition {
                                    reads: [a.input, false],
                                    guard: g1,
                                    updates: a.updates.clone(),
                                    to: ids.id(PaKind::Pair(a.to, q2)),
                                });
                            }
                            continue;
                        };
                        for b in right.outgoing(q2) {
                            for (e2, o2) in output_cases(b) {
                                let Some(o2) = o2 else { continue };
                                let mut g = g1.and(&b.guard).with(Atom::Eq(o1.clone(), o2));
                                if let Some(x) = e2 {
                                    g = g.with(x);
                                }
                                if !sat(&g) {
                                    continue;
                                }
                                hit(Rule::ProductBoth);
                                let mut updates = a.updates.clone();
                                updates.extend(b.updates.iter().cloned());
                                st.transitions.push(PaTransition {
                                    reads: [a.input, b.input],
                                    guard: g,
                                    updates,
                                    to: ids.id(PaKind::Pair(a.to, b.to)),
                                });
                            }
                        }
                    }
                }
                for b in right.outgoing(q2) {
                    for (e2, o2) in output_cases(b) {
                        if o2.is_some() {
                            continue;
                        }
                        let g = match e2 {
                            Some(x) => b.guard.with(x),
                            None => b.guard.clone(),
                        };
                        if sat(&g) {
                            hit(Rule::ProductRightEps);
                            st.transitions.push(PaTransition {
                                reads: [false, b.input],
                                guard: g,
                                updates: b.updates.clone(),
                                to: ids.id(PaKind::Pair(q1, b.to)),
                            });
                        }
                    }
                }
                let after = if univ2[q2] {
                    hit(Rule::ProductRightUniversal);
                    PaKind::Accept
                } else {
                    PaKind::Tail(q2)
                };
                if silent1[q1] {
                    hit(Rule::ProductLeftDone);
                    st.left_done.push(LeftDone {
                        guard: Constraint::tt(),
                        to: ids.id(after),
                        eager: true,
                    });
                } else {
                    for g in &t1.finals[q1] {
                        if sat(g) {
                            hit(Rule::ProductLeftDone);
                            st.left_done.push(LeftDone {
                                guard: g.clone(),
                                to: ids.id(after),
                                eager: false,
                            });
                        }
                    }
                }
            }
            PaKind::Tail(q2) => {
                for b in right.outgoing(q2) {
                    if !sat(&b.guard) {
                        continue;
                    }
                    hit(Rule::ProductTail);
                    let to = if univ2[b.to] {
                        PaKind::Accept
                    } else {
                        PaKind::Tail(b.to)
                    };
                    st.transitions.push(PaTransition {
                        reads: [false, b.input],
                        guard: b.guard.clone(),
                        updates: b.updates.clone(),
                        to: ids.id(to),
                    });
                }
                st.accepting = right.finals[q2]
                    .iter()
                    .filter(|g| sat(g))
                    .cloned()
                    .collect();
            }
            PaKind::Accept => {}
        }
        if built.len() <= id {
            built.resize(id + 1, None);
        }
        built[id] = Some(st);
    }
    let states: Vec<PaState> = built
        .into_iter()
        .map(|s| s.expect("every interned state is built"))
        .collect();
    trim(PrefixAutomaton {
        registers: r1 + t2.registers,
        initial,
        states,
    })
}

/// Removes states that cannot lead to acceptance and renumbers.
fn trim(pa: PrefixAutomaton) -> PrefixAutomaton {
    let n = pa.states.len();
    let mut live: Vec<bool> = pa
        .states
        .iter()
        .map(|s| s.kind == PaKind::Accept || !s.accepting.is_empty())
        .collect();
    let mut changed = true;
    while changed {
        changed = false;
        for q in 0..n {
            if live[q] {
                continue;
            }
            let s = &pa.states[q];
            if s.transitions.iter().any(|t| live[t.to]) || s.left_done.iter().any(|d| live[d.to]) {
                live[q] = true;
                changed = true;
            }
        }
    }
    live[pa.initial] = true;
    // Keep only states reachable through live states.
    let mut reach = alloc::vec![false; n];
    let mut stack = alloc::vec![pa.initial];
    reach[pa.initial] = true;
    while let Some(q) = stack.pop() {
        let s = &pa.states[q];
        for to in s
            .transitions
            .iter()
            .map(|t| t.to)
            .chain(s.left_done.iter().map(|d| d.to))
        {
            if live[to] && !reach[to] {
                reach[to] = true;
                stack.push(to);
            }
        }
    }
    let mut map = alloc::vec![usize::MAX; n];
    let mut k = 0;
    for q in 0..n {
        if reach[q] {
            map[q] = k;
            k += 1;
        }
    }
    let states = pa
        .states
        .into_iter()
        .enumerate()
        .filter(|(q, _)| reach[*q])
        .map(|(_, mut s)| {
            s.transitions.retain(|t| map[t.to] != usize::MAX);
            for t in &mut s.transitions {
                t.to = map[t.to];
            }
            s.left_done.retain(|d| map[d.to] != usize::MAX);
            for d in &mut s.left_done {
                d.to = map[d.to];
            }
            s
        })
        .collect();
    PrefixAutomaton {
        registers: pa.registers,
        initial: map[pa.initial],
        states,
    }
}
