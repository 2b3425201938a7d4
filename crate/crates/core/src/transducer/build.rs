//! Transducers for the syntactic forms of trace formulas and the regular
//! operators that combine them.

use alloc::vec::Vec;

use super::epsilon::{eliminate_epsilon, prune};
use super::stats::{hit, Rule};
use super::{
    compose_sequential, Atom, CompileError, Constraint, Term, Transducer, Transition, Update,
};
use crate::formula::TraceFormula;
use crate::trace::{word, DataDomain, ProjId, Value};

/// Copies its input to its output.
pub fn identity_transducer() -> Transducer {
    let mut t = Transducer::with_states(1);
    t.set_final(0);
    t.transitions.push(Transition {
        from: 0,
        to: 0,
        input: true,
        guard: Constraint::tt(),
        updates: Vec::new(),
        output: Some(Term::letter()),
    });
    t
}

/// Outputs the projection of each letter, skipping letters it maps to `ε`.
pub fn projection_transducer(p: ProjId) -> Transducer {
    let projected = Term::letter().then(p);
    let mut t = Transducer::with_states(1);
    t.set_final(0);
    t.transitions.push(Transition {
        from: 0,
        to: 0,
        input: true,
        guard: Constraint::of([Atom::NotEps(projected.clone())]),
        updates: Vec::new(),
        output: Some(projected.clone()),
    });
    t.transitions.push(Transition {
        from: 0,
        to: 0,
        input: true,
        guard: Constraint::of([Atom::IsEps(projected)]),
        updates: Vec::new(),
        output: None,
    });
    t
}

/// Reads nothing and emits `c`.
pub fn constant(c: Value) -> Transducer {
    let mut t = Transducer::with_states(2);
    t.set_final(1);
    t.transitions.push(Transition {
        from: 0,
        to: 1,
        input: false,
        guard: Constraint::tt(),
        updates: Vec::new(),
        output: Some(Term::constant(c)),
    });
    t
}

/// Reads nothing and emits nothing.
pub fn emitter() -> Transducer {
    let mut t = Transducer::with_states(1);
    t.set_final(0);
    t
}

fn offset_term(t: &Term, regs: u32) -> Term {
    t.map_base(&mut |b| match b {
        super::Base::Reg(r) => Term::reg(r + regs),
        other => Term {
            base: other.clone(),
            projs: Vec::new(),
        },
    })
}

/// Renumbers states by `states` and registers by `regs`.
pub(super) fn shifted(t: &Transducer, states: usize, regs: u32) -> Vec<Transition> {
    t.transitions
        .iter()
        .map(|tr| Transition {
            from: tr.from + states,
            to: tr.to + states,
            input: tr.input,
            guard: tr.guard.map_terms(&mut |x| offset_term(x, regs)),
            updates: tr
                .updates
                .iter()
                .map(|u| Update {
                    reg: u.reg + regs,
                    value: offset_term(&u.value, regs),
                })
                .collect(),
            output: tr.output.as_ref().map(|o| offset_term(o, regs)),
        })
        .collect()
}

pub(super) fn shifted_finals(t: &Transducer, regs: u32) -> Vec<Vec<Constraint>> {
    t.finals
        .iter()
        .map(|gs| {
            gs.iter()
                .map(|g| g.map_terms(&mut |x| offset_term(x, regs)))
                .collect()
        })
        .collect()
}

fn conj_all(a: &[Constraint], b: &[Constraint]) -> Vec<Constraint> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            let c = x.and(y);
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out
}

/// Disjoint union of the state spaces; returns the combined transducer and
/// the state offset of the second operand.
fn juxtapose(t1: &Transducer, t2: &Transducer) -> (Transducer, usize) {
    let off = t1.states;
    let mut t = Transducer::with_states(t1.states + t2.states);
    t.initial = t1.initial;
    t.registers = t1.registers + t2.registers;
    t.transitions = t1.transitions.clone();
    t.transitions.extend(shifted(t2, off, t1.registers));
    for (q, gs) in t1.finals.iter().enumerate() {
        t.finals[q] = gs.clone();
    }
    for (q, gs) in shifted_finals(t2, t1.registers).into_iter().enumerate() {
        t.finals[q + off] = gs;
    }
    (t, off)
}

/// Outputs of `t1` followed by outputs of `t2`, the input split accordingly.
pub fn concat(t1: &Transducer, t2: &Transducer) -> Transducer {
    let (mut t, off) = juxtapose(t1, t2);
    let init2 = t2.initial + off;
    let final1: Vec<usize> = (0..t1.states)
        .filter(|&q| !t1.finals[q].is_empty())
        .collect();
    // A single unconditional final state without outgoing transitions can
    // simply become the second initial state.
    if let [f] = final1[..] {
        if t1.is_final_unconditionally(f) && t1.outgoing(f).next().is_none() && f != t1.initial {
            hit(Rule::ConcatMerge);
            for tr in &mut t.transitions {
                if tr.to == f {
                    tr.to = init2;
                }
            }
            t.finals[f] = Vec::new();
            return prune(&t, None);
        }
    }
    hit(Rule::ConcatCopy);
    let init2_out: Vec<Transition> = t
        .transitions
        .iter()
        .filter(|tr| tr.from == init2)
        .cloned()
        .collect();
    let init2_finals = t.finals[init2].clone();
    for &f in &final1 {
        let guards = t1.finals[f].clone();
        for g in &guards {
            for tr in &init2_out {
                t.transitions.push(Transition {
                    from: f,
                    guard: g.and(&tr.guard),
                    ..tr.clone()
                });
            }
        }
        t.finals[f] = conj_all(&guards, &init2_finals);
    }
    for q in 0..t1.states {
        if !final1.contains(&q) {
            t.finals[q] = Vec::new();
        }
    }
    prune(&t, None)
}

/// Either operand's outputs.
pub fn union(t1: &Transducer, t2: &Transducer) -> Transducer {
    let (mut t, off) = juxtapose(t1, t2);
    let init = t.add_state();
    t.initial = init;
    let starts = [(t1.initial, 0usize), (t2.initial + off, 1)];
    let mut new = Vec::new();
    let mut finals = Vec::new();
    for (s, _) in starts {
        for tr in t.transitions.iter().filter(|tr| tr.from == s) {
            new.push(Transition {
                from: init,
                ..tr.clone()
            });
        }
        finals.extend(t.finals[s].iter().cloned());
    }
    t.transitions.extend(new);
    t.finals[init] = finals;
    prune(&t, None)
}

/// Any number of repetitions. Registers are not reset between rounds,
/// which is only meaningful for register-free operands (the only ones the
/// formula language allows under `*`).
pub fn star(t1: &Transducer) -> Transducer {
    let mut t = t1.clone();
    let init = t.add_state();
    let old_init = t1.initial;
    let init_out: Vec<Transition> = t1
        .transitions
        .iter()
        .filter(|tr| tr.from == old_init)
        .cloned()
        .collect();
    for tr in &init_out {
        t.transitions.push(Transition {
            from: init,
            ..tr.clone()
        });
    }
    for f in 0..t1.states {
        for g in &t1.finals[f] {
            for tr in &init_out {
                t.transitions.push(Transition {
                    from: f,
                    guard: g.and(&tr.guard),
                    ..tr.clone()
                });
            }
        }
    }
    t.initial = init;
    t.set_final(init);
    prune(&t, None)
}

/// Stutter reduction: one register holding the last emitted letter.
pub fn stutter_transducer() -> Transducer {
    let x = Term::letter();
    let r = Term::reg(0);
    let store = alloc::vec![Update {
        reg: 0,
        value: x.clone()
    }];
    let mut t = Transducer::with_states(2);
    t.registers = 1;
    t.set_final(0);
    t.set_final(1);
    t.transitions.push(Transition {
        from: 0,
        to: 1,
        input: true,
        guard: Constraint::tt(),
        updates: store.clone(),
        output: Some(x.clone()),
    });
    t.transitions.push(Transition {
        from: 1,
        to: 1,
        input: true,
        guard: Constraint::of([Atom::Eq(r.clone(), x.clone())]),
        updates: Vec::new(),
        output: None,
    });
    t.transitions.push(Transition {
        from: 1,
        to: 1,
        input: true,
        guard: Constraint::of([Atom::Neq(r, x.clone())]),
        updates: store,
        output: Some(x),
    });
    t
}

fn step(t: &mut Transducer, from: usize, to: usize, emit: bool) {
    t.transitions.push(Transition {
        from,
        to,
        input: true,
        guard: Constraint::tt(),
        updates: Vec::new(),
        output: emit.then(Term::letter),
    });
}

/// Skips `k` letters, copies the next `m + 1`, then skips the rest. Words
/// shorter than `k + m + 1` are rejected.
pub fn slice_transducer(k: usize, m: usize) -> Transducer {
    let mut t = Transducer::with_states(k + m + 2);
    for q in 0..k + m + 1 {
        step(&mut t, q, q + 1, q >= k);
    }
    let last = k + m + 1;
    step(&mut t, last, last, false);
    t.set_final(last);
    t
}

/// `w[i:j]` for every input `w`, with negative indices counted from the end
/// and `ε` whenever the resolved range is not inside the word.
///
/// Inputs shorter than `P + S` (the number of letters addressed from the
/// front and from the back) get one exact-length chain each. Longer inputs
/// share one branch: a front chain of `P` letters, a loop, and a back chain
/// of `S` letters, where whether a letter is copied depends only on its
/// position in that layout.
pub fn total_slice_transducer(i: i64, j: i64) -> Transducer {
    let front = [i, j]
        .iter()
        .filter(|&&x| x >= 0)
        .map(|&x| x as usize + 1)
        .max()
        .unwrap_or(0);
    let back = [i, j]
        .iter()
        .filter(|&&x| x < 0)
        .map(|&x| x.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    let mut branches: Vec<Transducer> = Vec::new();
    for n in 0..front + back {
        let positions: Vec<usize> = (0..n).collect();
        let kept = word::slice(&positions, i, j);
        let mut t = Transducer::with_states(n + 1);
        for k in 0..n {
            step(&mut t, k, k + 1, kept.contains(&k));
        }
        t.set_final(n);
        branches.push(t);
    }
    // Long inputs: front positions k < front, back positions d = n - k in 1..=back.
    let in_front = |k: usize| {
        let lo_ok = i >= 0 && k as i64 >= i;
        let hi_ok = j < 0 || k as i64 <= j;
        lo_ok && hi_ok
    };
    let in_middle = i >= 0 && j < 0;
    let in_back = |d: usize| {
        let lo_ok = i >= 0 || d as i64 <= -i;
        let hi_ok = j < 0 && d as i64 >= -j;
        lo_ok && hi_ok
    };
    let mut t = Transducer::with_states(front + back + 1);
    for k in 0..front {
        step(&mut t, k, k + 1, in_front(k));
    }
    step(&mut t, front, front, in_middle);
    for d in (1..=back).rev() {
        let q = front + (back - d);
        step(&mut t, q, q + 1, in_back(d));
    }
    t.set_final(front + back);
    branches.push(t);
    let mut it = branches.into_iter();
    let first = it.next().unwrap();
    it.fold(first, |acc, b| union(&acc, &b))
}

/// Reads its whole input and emits nothing.
pub fn skip_all() -> Transducer {
    let mut t = Transducer::with_states(1);
    t.set_final(0);
    step(&mut t, 0, 0, false);
    t
}

/// Transducer for a variable-free trace formula: reads nothing and emits
/// exactly the words of its language.
pub fn from_regex(tf: &TraceFormula, domain: &DataDomain) -> Result<Transducer, CompileError> {
    let t = match tf {
        TraceFormula::Epsilon => emitter(),
        TraceFormula::Const(c) => constant(c.clone()),
        TraceFormula::Proj { .. } => return Err(CompileError::NotVariableFree),
        TraceFormula::Concat(a, b) => concat(&from_regex(a, domain)?, &from_regex(b, domain)?),
        TraceFormula::Union(a, b) => union(&from_regex(a, domain)?, &from_regex(b, domain)?),
        TraceFormula::Star(a) => star(&from_regex(a, domain)?),
        TraceFormula::StutterReduce(a) => {
            let inner = eliminate_epsilon(&from_regex(a, domain)?, domain);
            eliminate_epsilon(
                &compose_sequential(&inner, &stutter_transducer(), domain)?,
                domain,
            )
        }
        TraceFormula::Slice(a, i, j) => {
            let inner = eliminate_epsilon(&from_regex(a, domain)?, domain);
            eliminate_epsilon(
                &compose_sequential(&inner, &total_slice_transducer(*i, *j), domain)?,
                domain,
            )
        }
    };
    Ok(prune(&t, Some(domain)))
}

/// Transducer for a simple trace formula reading the trace of its
/// variable. Parts without the variable ignore the input; a formula whose
/// variable occurs on both sides of a concatenation is rejected.
pub fn translate(tf: &TraceFormula, domain: &DataDomain) -> Result<Transducer, CompileError> {
    if tf.vars().is_empty() {
        return Ok(concat(&from_regex(tf, domain)?, &skip_all()));
    }
    let t = match tf {
        TraceFormula::Epsilon | TraceFormula::Const(_) => unreachable!("variable-free"),
        TraceFormula::Proj { proj, .. } => {
            let id = domain
                .projection_id(proj)
                .map_err(|e| CompileError::UnknownProjection(e.0))?;
            projection_transducer(id)
        }
        TraceFormula::Concat(a, b) => match (a.vars().is_empty(), b.vars().is_empty()) {
            (false, true) => concat(&translate(a, domain)?, &from_regex(b, domain)?),
            (true, false) => concat(&from_regex(a, domain)?, &translate(b, domain)?),
            _ => return Err(CompileError::NeedsWholeTrace),
        },
        TraceFormula::Union(a, b) => union(&translate(a, domain)?, &translate(b, domain)?),
        TraceFormula::Star(_) => return Err(CompileError::NotSimple),
        TraceFormula::StutterReduce(a) => {
            let inner = eliminate_epsilon(&translate(a, domain)?, domain);
            eliminate_epsilon(
                &compose_sequential(&inner, &stutter_transducer(), domain)?,
                domain,
            )
        }
        TraceFormula::Slice(a, i, j) => {
            let inner = eliminate_epsilon(&translate(a, domain)?, domain);
            eliminate_epsilon(
                &compose_sequential(&inner, &total_slice_transducer(*i, *j), domain)?,
                domain,
            )
        }
    };
    Ok(prune(&t, Some(domain)))
}
