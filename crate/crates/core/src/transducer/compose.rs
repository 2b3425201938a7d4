use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::build::{shifted, shifted_finals};
use super::constraint::satisfiable;
use super::epsilon::prune;
use super::stats::{hit, Rule};
use super::{Atom, Base, CompileError, Constraint, Tape, Term, Transducer, Transition};
use crate::trace::DataDomain;

/// Interns product states, handing out dense ids and remembering which
/// ones still have to be explored.
pub(super) struct StateMap<K: Ord + Clone> {
    ids: BTreeMap<K, usize>,
    todo: Vec<(K, usize)>,
}

impl<K: Ord + Clone> Default for StateMap<K> {
    fn default() -> Self {
        StateMap {
            ids: BTreeMap::new(),
            todo: Vec::new(),
        }
    }
}

impl<K: Ord + Clone> StateMap<K> {
    pub fn id(&mut self, k: K) -> usize {
        let next = self.ids.len();
        let id = *self.ids.entry(k.clone()).or_insert(next);
        if id == next {
            self.todo.push((k, id));
        }
        id
    }

    pub fn next(&mut self) -> Option<(K, usize)> {
        self.todo.pop()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &usize)> {
        self.ids.iter()
    }
}

/// The ways a transition's output can go: `(extra guard, emitted term)`.
/// An output that may evaluate to the empty word is split into an emitting
/// case and a silent case.
pub(super) fn output_cases(tr: &Transition) -> Vec<(Option<Atom>, Option<Term>)> {
    match &tr.output {
        None => alloc::vec![(None, None)],
        Some(o) if o.may_be_eps() => {
            hit(Rule::ComposeMaybeEps);
            alloc::vec![
                (Some(Atom::NotEps(o.clone())), Some(o.clone())),
                (Some(Atom::IsEps(o.clone())), None),
            ]
        }
        Some(o) => alloc::vec![(None, Some(o.clone()))],
    }
}

/// Replaces the letter the second transducer reads by the term the first
/// one emits.
fn feed(t: &Term, emitted: &Term) -> Term {
    t.map_base(&mut |b| match b {
        Base::Letter(Tape::Left) => emitted.clone(),
        other => Term {
            base: other.clone(),
            projs: Vec::new(),
        },
    })
}

/// `second(first(x))`: runs `second` on the outputs of `first`.
///
/// Both operands must be free of transitions that neither read nor write.
/// States are explored from the pair of initial states; combined
/// transitions whose guards are unsatisfiable are dropped.
pub fn compose_sequential(
    first: &Transducer,
    second: &Transducer,
    domain: &DataDomain,
) -> Result<Transducer, CompileError> {
    if first.has_eps_eps() || second.has_eps_eps() {
        return Err(CompileError::EpsilonStep);
    }
    let regs1 = first.registers;
    // Second operand with registers moved after the first's.
    let second_trs = shifted(second, 0, regs1);
    let second_finals = shifted_finals(second, regs1);

    let mut states = StateMap::default();
    let initial = states.id((first.initial, second.initial));
    let mut trs: Vec<Transition> = Vec::new();
    while let Some(((q1, q2), from)) = states.next() {
        for t1 in first.outgoing(q1) {
            for (extra, emitted) in output_cases(t1) {
                let base_guard = match &extra {
                    Some(a) => t1.guard.with(a.clone()),
                    None => t1.guard.clone(),
                };
                match emitted {
                    None => {
                        hit(Rule::ComposeInputEps);
                        let to = states.id((t1.to, q2));
                        trs.push(Transition {
                            from,
                            to,
                            input: t1.input,
                            guard: base_guard,
                            updates: t1.updates.clone(),
                            output: None,
                        });
                    }
                    Some(o1) => {
                        for t2 in second_trs.iter().filter(|t| t.from == q2 && t.input) {
                            let guard = base_guard.and(&t2.guard.map_terms(&mut |t| feed(t, &o1)));
                            if !satisfiable(&guard, domain) {
                                hit(Rule::ComposeUnsat);
                                continue;
                            }
                            hit(Rule::ComposeInput);
                            let mut updates = t1.updates.clone();
                            updates.extend(t2.updates.iter().map(|u| super::Update {
                                reg: u.reg,
                                value: feed(&u.value, &o1),
                            }));
                            let to = states.id((t1.to, t2.to));
                            trs.push(Transition {
                                from,
                                to,
                                input: t1.input,
                                guard,
                                updates,
                                output: t2.output.as_ref().map(|o| feed(o, &o1)),
                            });
                        }
                    }
                }
            }
        }
        for t2 in second_trs.iter().filter(|t| t.from == q2 && !t.input) {
            hit(Rule::ComposeSecondEps);
            let to = states.id((q1, t2.to));
            trs.push(Transition {
                from,
                to,
                input: false,
                guard: t2.guard.clone(),
                updates: t2.updates.clone(),
                output: t2.output.clone(),
            });
        }
    }
    let mut out = Transducer::with_states(states.len());
    out.initial = initial;
    out.registers = regs1 + second.registers;
    out.transitions = trs
        .into_iter()
        .filter(|t| satisfiable(&t.guard, domain))
        .collect();
    for (&(q1, q2), &id) in states.iter() {
        let mut gs: Vec<Constraint> = Vec::new();
        for g1 in &first.finals[q1] {
            for g2 in &second_finals[q2] {
                let g = g1.and(g2);
                if satisfiable(&g, domain) && !gs.contains(&g) {
                    gs.push(g);
                }
            }
        }
        out.finals[id] = gs;
    }
    Ok(prune(&out, Some(domain)))
}
