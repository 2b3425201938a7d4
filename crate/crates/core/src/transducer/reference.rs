//! Brute-force semantics of transducers, used to check constructions.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::constraint::Env;
use super::Transducer;
use crate::trace::{DataDomain, Value};

/// All outputs of `t` on `input` of length at most `max_out`.
pub fn transducer_outputs(
    t: &Transducer,
    input: &[Value],
    domain: &DataDomain,
    max_out: usize,
) -> BTreeSet<Vec<Value>> {
    type Node = (usize, usize, Vec<Option<Value>>, Vec<Value>);
    let mut out = BTreeSet::new();
    let mut seen: BTreeSet<Node> = BTreeSet::new();
    let start: Node = (
        t.initial,
        0,
        alloc::vec![None; t.registers as usize],
        Vec::new(),
    );
    let mut stack = alloc::vec![start.clone()];
    seen.insert(start);
    while let Some((q, pos, regs, word)) = stack.pop() {
        let idle = Env {
            domain,
            letters: [None, None],
            regs: &regs,
        };
        if pos == input.len() && t.finals[q].iter().any(|g| idle.satisfies(g)) {
            out.insert(word.clone());
        }
        for tr in t.outgoing(q) {
            let letter = if tr.input {
                match input.get(pos) {
                    Some(x) => Some(x),
                    None => continue,
                }
            } else {
                None
            };
            let env = Env {
                domain,
                letters: [letter, None],
                regs: &regs,
            };
            if !env.satisfies(&tr.guard) {
                continue;
            }
            let mut w = word.clone();
            if let Some(o) = &tr.output {
                if let Some(v) = env.eval(o) {
                    if w.len() == max_out {
                        continue;
                    }
                    w.push(v);
                }
            }
            let node = (tr.to, pos + tr.input as usize, env.apply(&tr.updates), w);
            if seen.insert(node.clone()) {
                stack.push(node);
            }
        }
    }
    out
}

/// Whether some output of `t1` on `left` is a prefix of some output of
/// `t2` on `right`, looking at outputs up to `max_out` letters.
pub fn prefix_related(
    t1: &Transducer,
    t2: &Transducer,
    left: &[Value],
    right: &[Value],
    domain: &DataDomain,
    max_out: usize,
) -> bool {
    let us = transducer_outputs(t1, left, domain, max_out);
    let vs = transducer_outputs(t2, right, domain, max_out);
    us.iter().any(|u| vs.iter().any(|v| v.starts_with(u)))
}
