//! Incremental runs of prefix automata over growing tapes.

use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::constraint::Env;
use super::product::{PaKind, PrefixAutomaton};
use crate::trace::{DataDomain, Value};

/// The part of a trace seen so far.
#[derive(Clone, Copy, Debug)]
pub struct TapeView<'a> {
    pub letters: &'a [Value],
    pub terminated: bool,
}

impl<'a> TapeView<'a> {
    pub fn new(letters: &'a [Value], terminated: bool) -> Self {
        TapeView {
            letters,
            terminated,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomStatus {
    Accepted,
    Rejected,
    Pending,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Config {
    state: usize,
    pos: [usize; 2],
    regs: Vec<Option<Value>>,
}

/// The set of configurations of one prefix automaton on one pair of
/// tapes. Configurations that are waiting for more input are kept; the
/// others are explored once and only remembered to avoid revisiting.
#[derive(Clone, Debug)]
pub struct AtomRun {
    automaton: Arc<PrefixAutomaton>,
    seen: BTreeSet<Config>,
    waiting: Vec<Config>,
    status: AtomStatus,
    last: Option<[(usize, bool); 2]>,
    explored: u64,
}

impl AtomRun {
    pub fn new(automaton: Arc<PrefixAutomaton>) -> Self {
        let init = Config {
            state: automaton.initial,
            pos: [0, 0],
            regs: alloc::vec![None; automaton.registers as usize],
        };
        let mut seen = BTreeSet::new();
        seen.insert(init.clone());
        AtomRun {
            automaton,
            seen,
            waiting: alloc::vec![init],
            status: AtomStatus::Pending,
            last: None,
            explored: 0,
        }
    }

    pub fn status(&self) -> AtomStatus {
        self.status
    }

    /// Configurations explored so far.
    pub fn explored(&self) -> u64 {
        self.explored
    }

    /// Configurations still waiting for input.
    pub fn waiting(&self) -> usize {
        self.waiting.len()
    }

    /// Consumes whatever the tapes offer beyond what was seen before.
    pub fn advance(
        &mut self,
        left: TapeView<'_>,
        right: TapeView<'_>,
        domain: &DataDomain,
    ) -> AtomStatus {
        if self.status != AtomStatus::Pending {
            return self.status;
        }
        let shape = [
            (left.letters.len(), left.terminated),
            (right.letters.len(), right.terminated),
        ];
        if self.last == Some(shape) {
            return self.status;
        }
        self.last = Some(shape);
        let tapes = [left, right];
        let a = Arc::clone(&self.automaton);
        let mut stack = core::mem::take(&mut self.waiting);
        let mut waiting = Vec::new();
        while let Some(c) = stack.pop() {
            self.explored += 1;
            let st = &a.states[c.state];
            if st.kind == PaKind::Accept {
                return self.finish(AtomStatus::Accepted);
            }
            let mut blocked = false;
            'trans: for t in &st.transitions {
                let mut letters = [None, None];
                for k in 0..2 {
                    if t.reads[k] {
                        match tapes[k].letters.get(c.pos[k]) {
                            Some(x) => letters[k] = Some(x),
                            None => {
                                blocked |= !tapes[k].terminated;
                                continue 'trans;
                            }
                        }
                    }
                }
                let env = Env {
                    domain,
                    letters,
                    regs: &c.regs,
                };
                if !env.satisfies(&t.guard) {
                    continue;
                }
                let next = Config {
                    state: t.to,
                    pos: [
                        c.pos[0] + t.reads[0] as usize,
                        c.pos[1] + t.reads[1] as usize,
                    ],
                    regs: env.apply(&t.updates),
                };
                if self.seen.insert(next.clone()) {
                    stack.push(next);
                }
            }
            let env = Env {
                domain,
                letters: [None, None],
                regs: &c.regs,
            };
            let left_at_end = c.pos[0] == left.letters.len();
            for d in &st.left_done {
                if !d.eager && !(left_at_end && left.terminated) {
                    blocked |= left_at_end;
                    continue;
                }
                if env.satisfies(&d.guard) {
                    let next = Config {
                        state: d.to,
                        pos: c.pos,
                        regs: c.regs.clone(),
                    };
                    if self.seen.insert(next.clone()) {
                        stack.push(next);
                    }
                }
            }
            if !st.accepting.is_empty() && c.pos[1] == right.letters.len() {
                if right.terminated {
                    if st.accepting.iter().any(|g| env.satisfies(g)) {
                        return self.finish(AtomStatus::Accepted);
                    }
                } else {
                    blocked = true;
                }
            }
            if blocked {
                waiting.push(c);
            }
        }
        self.waiting = waiting;
        if self.waiting.is_empty() {
            self.finish(AtomStatus::Rejected)
        } else {
            AtomStatus::Pending
        }
    }

    fn finish(&mut self, status: AtomStatus) -> AtomStatus {
        self.status = status;
        self.waiting.clear();
        self.seen.clear();
        status
    }
}
