use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;

use super::constraint::satisfiable;
use super::stats::{hit, Rule};
use super::{Base, Constraint, Term, Transducer, Transition, Update};
use crate::trace::DataDomain;

/// Upper bound on symbolic states explored from one state while folding
/// silent paths; only reached by register updates that keep growing terms.
const FOLD_LIMIT: usize = 4096;

fn subst(t: &Term, regs: &[Term]) -> Term {
    t.map_base(&mut |b| match b {
        Base::Reg(r) => regs[*r as usize].clone(),
        other => Term {
            base: other.clone(),
            projs: Vec::new(),
        },
    })
}

/// Removes transitions that neither read nor write by folding every silent
/// path into the transition (or final guard) that follows it. Register
/// effects and guards along the path are substituted symbolically.
pub fn eliminate_epsilon(t: &Transducer, domain: &DataDomain) -> Transducer {
    if !t.has_eps_eps() {
        return t.clone();
    }
    let identity: Vec<Term> = (0..t.registers).map(Term::reg).collect();
    let mut out = t.clone();
    out.transitions = t
        .transitions
        .iter()
        .filter(|tr| !tr.is_eps_eps())
        .cloned()
        .collect();
    for q in 0..t.states {
        let start = (q, identity.clone(), Constraint::tt());
        let mut seen: BTreeSet<(usize, Vec<Term>, Constraint)> = BTreeSet::new();
        let mut queue = VecDeque::from([start.clone()]);
        seen.insert(start.clone());
        while let Some((p, regs, guard)) = queue.pop_front() {
            if (p, &regs, &guard) != (start.0, &start.1, &start.2) {
                for tr in t.outgoing(p).filter(|tr| !tr.is_eps_eps()) {
                    let g = guard.and(&tr.guard.map_terms(&mut |x| subst(x, &regs)));
                    if !satisfiable(&g, domain) {
                        continue;
                    }
                    hit(Rule::EpsilonFold);
                    let mut updates: Vec<Update> = Vec::new();
                    for r in 0..t.registers {
                        if let Some(u) = tr.updates.iter().find(|u| u.reg == r) {
                            updates.push(Update {
                                reg: r,
                                value: subst(&u.value, &regs),
                            });
                        } else if regs[r as usize] != Term::reg(r) {
                            updates.push(Update {
                                reg: r,
                                value: regs[r as usize].clone(),
                            });
                        }
                    }
                    out.transitions.push(Transition {
                        from: q,
                        to: tr.to,
                        input: tr.input,
                        guard: g,
                        updates,
                        output: tr.output.as_ref().map(|o| subst(o, &regs)),
                    });
                }
                for fg in &t.finals[p] {
                    let g = guard.and(&fg.map_terms(&mut |x| subst(x, &regs)));
                    if satisfiable(&g, domain) && !out.finals[q].contains(&g) {
                        hit(Rule::EpsilonFinal);
                        out.finals[q].push(g);
                    }
                }
            }
            for tr in t.outgoing(p).filter(|tr| tr.is_eps_eps()) {
                let g = guard.and(&tr.guard.map_terms(&mut |x| subst(x, &regs)));
                if !satisfiable(&g, domain) {
                    continue;
                }
                let mut next = regs.clone();
                for u in &tr.updates {
                    next[u.reg as usize] = subst(&u.value, &regs);
                }
                let node = (tr.to, next, g);
                if seen.len() < FOLD_LIMIT && seen.insert(node.clone()) {
                    queue.push_back(node);
                }
            }
        }
    }
    out.transitions.sort();
    out.transitions.dedup();
    prune(&out, Some(domain))
}

/// Drops unsatisfiable transitions and final guards (when a domain is
/// given), then states that are unreachable or cannot reach acceptance.
pub fn prune(t: &Transducer, domain: Option<&DataDomain>) -> Transducer {
    let sat = |c: &Constraint| domain.is_none_or(|d| satisfiable(c, d));
    let transitions: Vec<Transition> = t
        .transitions
        .iter()
        .filter(|tr| sat(&tr.guard))
        .cloned()
        .collect();
    let finals: Vec<Vec<Constraint>> = t
        .finals
        .iter()
        .map(|gs| gs.iter().filter(|g| sat(g)).cloned().collect())
        .collect();
    let mut fwd = alloc::vec![false; t.states];
    let mut stack = alloc::vec![t.initial];
    fwd[t.initial] = true;
    while let Some(q) = stack.pop() {
        for tr in transitions.iter().filter(|tr| tr.from == q) {
            if !fwd[tr.to] {
                fwd[tr.to] = true;
                stack.push(tr.to);
            }
        }
    }
    let mut bwd: Vec<bool> = finals.iter().map(|gs| !gs.is_empty()).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for tr in &transitions {
            if bwd[tr.to] && !bwd[tr.from] {
                bwd[tr.from] = true;
                changed = true;
            }
        }
    }
    let keep: Vec<bool> = (0..t.states)
        .map(|q| q == t.initial || (fwd[q] && bwd[q]))
        .collect();
    let mut map = alloc::vec![usize::MAX; t.states];
    let mut n = 0;
    for q in 0..t.states {
        if keep[q] {
            map[q] = n;
            n += 1;
        }
    }
    let mut out = Transducer::with_states(n);
    out.initial = map[t.initial];
    out.registers = t.registers;
    for q in 0..t.states {
        if keep[q] {
            out.finals[map[q]] = finals[q].clone();
        }
    }
    let mut trs: Vec<Transition> = transitions
        .into_iter()
        .filter(|tr| keep[tr.from] && keep[tr.to])
        .map(|tr| Transition {
            from: map[tr.from],
            to: map[tr.to],
            ..tr
        })
        .collect();
    trs.sort();
    trs.dedup();
    out.transitions = trs;
    out
}
