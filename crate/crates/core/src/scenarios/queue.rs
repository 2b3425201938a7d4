//! Concurrent queue histories.
//!
//! A history is a trace with one event per completed operation, ordered by
//! invocation time. Each event carries the process, the operation (`push`
//! or `pop`), its parameter (the pushed value, the popped value or the
//! symbol `empty`) and integer invocation and response times. Sequential
//! histories (linearizations) also carry the queue `size` after each
//! operation.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hash::hash_of;
use crate::trace::{Trace, Valuation, Value};

pub const EMPTY: &str = "empty";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Push,
    Pop,
}

impl Op {
    pub fn name(self) -> &'static str {
        match self {
            Op::Push => "push",
            Op::Pop => "pop",
        }
    }
}

/// A pushed or popped value; `None` is the result of popping an empty
/// queue.
pub type Param = Option<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpEvent {
    pub proc: i64,
    pub op: Op,
    pub param: Param,
    pub invoke: i64,
    pub response: i64,
}

impl OpEvent {
    pub fn new(proc: i64, op: Op, param: Param, invoke: i64, response: i64) -> Self {
        OpEvent {
            proc,
            op,
            param,
            invoke,
            response,
        }
    }

    pub fn to_valuation(&self) -> Valuation {
        Valuation::from_pairs([
            ("proc", Value::Int(self.proc)),
            ("op", Value::sym(self.op.name())),
            ("param", param_value(self.param)),
            ("invoke", Value::Int(self.invoke)),
            ("response", Value::Int(self.response)),
        ])
    }

    pub fn from_valuation(v: &Valuation) -> Result<Self, HistoryError> {
        let bad = |what: &str| HistoryError::Malformed(format!("event without a valid `{what}`"));
        let int = |k: &str| v.get(k).and_then(Value::as_int).ok_or_else(|| bad(k));
        let op = match v.get("op").and_then(Value::as_sym) {
            Some("push") => Op::Push,
            Some("pop") => Op::Pop,
            _ => return Err(bad("op")),
        };
        let param = match v.get("param") {
            Some(Value::Int(n)) => Some(*n),
            Some(Value::Sym(s)) if &**s == EMPTY => None,
            _ => return Err(bad("param")),
        };
        Ok(OpEvent::new(
            int("proc")?,
            op,
            param,
            int("invoke")?,
            int("response")?,
        ))
    }

    /// `self` happens before `other`.
    pub fn precedes(&self, other: &OpEvent) -> bool {
        self.response < other.invoke
    }
}

fn param_value(p: Param) -> Value {
    match p {
        Some(n) => Value::Int(n),
        None => Value::sym(EMPTY),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HistoryError {
    Malformed(String),
}

impl core::fmt::Display for HistoryError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            HistoryError::Malformed(m) => write!(f, "malformed history: {m}"),
        }
    }
}

/// Reads a history from a trace and checks its timestamps: every operation
/// responds after it is invoked and no two timestamps coincide.
pub fn history_of(trace: &Trace) -> Result<Vec<OpEvent>, HistoryError> {
    let ops = trace
        .events()
        .map(OpEvent::from_valuation)
        .collect::<Result<Vec<_>, _>>()?;
    check_history(&ops)?;
    Ok(ops)
}

pub fn check_history(ops: &[OpEvent]) -> Result<(), HistoryError> {
    let mut times = BTreeSet::new();
    for (i, e) in ops.iter().enumerate() {
        if e.response <= e.invoke {
            return Err(HistoryError::Malformed(format!(
                "operation {i} responds before it is invoked"
            )));
        }
        if !times.insert(e.invoke) || !times.insert(e.response) {
            return Err(HistoryError::Malformed(format!(
                "operation {i} shares a timestamp"
            )));
        }
    }
    Ok(())
}

/// A sequential object that operations can be replayed on.
pub trait SequentialModel {
    fn reset(&mut self);
    /// Applies an operation; false if its result disagrees with the model.
    fn apply(&mut self, op: Op, param: Param) -> bool;
    fn size(&self) -> usize;
}

/// The FIFO queue: `pop` returns the oldest element, or `empty`.
#[derive(Clone, Debug, Default)]
pub struct ReferenceQueue {
    items: VecDeque<i64>,
}

pub fn reference_queue() -> ReferenceQueue {
    ReferenceQueue::default()
}

impl ReferenceQueue {
    pub fn push(&mut self, v: i64) {
        self.items.push_back(v);
    }

    pub fn pop(&mut self) -> Param {
        self.items.pop_front()
    }
}

impl SequentialModel for ReferenceQueue {
    fn reset(&mut self) {
        self.items.clear();
    }

    fn apply(&mut self, op: Op, param: Param) -> bool {
        match (op, param) {
            (Op::Push, Some(v)) => {
                self.push(v);
                true
            }
            (Op::Push, None) => false,
            (Op::Pop, p) => self.pop() == p,
        }
    }

    fn size(&self) -> usize {
        self.items.len()
    }
}

/// Replays a sequence of operations on a model.
pub fn replays(model: &mut dyn SequentialModel, ops: &[OpEvent]) -> bool {
    model.reset();
    ops.iter().all(|e| model.apply(e.op, e.param))
}

/// A sequential trace for a legal order of operations, with the queue size
/// after each operation.
pub fn sequential_trace(id: &str, ops: &[OpEvent]) -> Trace {
    let mut q = reference_queue();
    let events = ops.iter().map(|e| {
        q.apply(e.op, e.param);
        e.to_valuation().with("size", Value::Int(q.size() as i64))
    });
    Trace::complete(id, events.collect::<Vec<_>>())
}

/// Whether a sequential trace replays on the reference queue.
pub fn legal(trace: &Trace) -> bool {
    let Ok(ops) = trace
        .events()
        .map(OpEvent::from_valuation)
        .collect::<Result<Vec<_>, _>>()
    else {
        return false;
    };
    replays(&mut reference_queue(), &ops)
}

/// Whether the queue holds more than `k` elements after some operation of
/// a sequential trace.
pub fn exceeds(trace: &Trace, k: usize) -> bool {
    let mut size: i64 = 0;
    for e in trace.events() {
        match (e.get("op").and_then(Value::as_sym), e.get("param")) {
            (Some("push"), _) => size += 1,
            (Some("pop"), Some(Value::Int(_))) => size -= 1,
            _ => {}
        }
        if size > k as i64 {
            return true;
        }
    }
    false
}

/// A linearization of a history: an order of its operations that extends
/// happens-before and replays on the FIFO queue. Backtracking search over
/// the operations that may come next, remembering failed states (the set
/// of done operations together with the queue contents).
pub fn linearize(ops: &[OpEvent]) -> Result<Option<Vec<OpEvent>>, HistoryError> {
    check_history(ops)?;
    let mut order: Vec<usize> = (0..ops.len()).collect();
    order.sort_by_key(|&i| ops[i].invoke);
    let sorted: Vec<OpEvent> = order.iter().map(|&i| ops[i]).collect();
    let mut search = Lin {
        ops: &sorted,
        done: alloc::vec![false; sorted.len()],
        queue: VecDeque::new(),
        path: Vec::new(),
        failed: BTreeSet::new(),
    };
    Ok(search
        .go()
        .then(|| search.path.iter().map(|&i| sorted[i]).collect()))
}

struct Lin<'a> {
    ops: &'a [OpEvent],
    done: Vec<bool>,
    queue: VecDeque<i64>,
    path: Vec<usize>,
    failed: BTreeSet<u64>,
}

impl Lin<'_> {
    fn key(&self) -> u64 {
        hash_of(0x6c696e, &(&self.done, &self.queue))
    }

    fn go(&mut self) -> bool {
        if self.path.len() == self.ops.len() {
            return true;
        }
        let key = self.key();
        if self.failed.contains(&key) {
            return false;
        }
        // An operation may come next when every operation that responded
        // before its invocation is done; operations are sorted by invoke
        // time, so the candidates are a prefix of the undone ones.
        let horizon = self
            .ops
            .iter()
            .zip(&self.done)
            .filter(|(_, d)| !**d)
            .map(|(e, _)| e.response)
            .min()
            .unwrap_or(i64::MAX);
        for i in 0..self.ops.len() {
            if self.done[i] {
                continue;
            }
            let e = self.ops[i];
            if e.invoke > horizon {
                break;
            }
            let undo = match (e.op, e.param) {
                (Op::Push, Some(v)) => {
                    self.queue.push_back(v);
                    Undo::Push
                }
                (Op::Pop, Some(v)) if self.queue.front() == Some(&v) => {
                    self.queue.pop_front();
                    Undo::Pop(v)
                }
                (Op::Pop, None) if self.queue.is_empty() => Undo::Nothing,
                _ => continue,
            };
            self.done[i] = true;
            self.path.push(i);
            if self.go() {
                return true;
            }
            self.path.pop();
            self.done[i] = false;
            match undo {
                Undo::Push => {
                    self.queue.pop_back();
                }
                Undo::Pop(v) => self.queue.push_front(v),
                Undo::Nothing => {}
            }
        }
        self.failed.insert(key);
        false
    }
}

enum Undo {
    Push,
    Pop(i64),
    Nothing,
}

/// Reference enumerator: every permutation of the operations, kept when it
/// extends happens-before and replays on the queue. Returns the first such
/// order in lexicographic index order. Exponential; for small histories.
pub fn brute_force_linearization(ops: &[OpEvent]) -> Option<Vec<OpEvent>> {
    fn perms(
        ops: &[OpEvent],
        used: &mut Vec<bool>,
        cur: &mut Vec<OpEvent>,
    ) -> Option<Vec<OpEvent>> {
        if cur.len() == ops.len() {
            let ordered =
                (0..cur.len()).all(|i| (i + 1..cur.len()).all(|j| !cur[j].precedes(&cur[i])));
            return (ordered && replays(&mut reference_queue(), cur)).then(|| cur.clone());
        }
        for i in 0..ops.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            cur.push(ops[i]);
            let found = perms(ops, used, cur);
            cur.pop();
            used[i] = false;
            if found.is_some() {
                return found;
            }
        }
        None
    }
    perms(ops, &mut alloc::vec![false; ops.len()], &mut Vec::new())
}

/// Whether an order of operations extends the happens-before order.
pub fn respects_happens_before(order: &[OpEvent]) -> bool {
    (0..order.len()).all(|i| (i + 1..order.len()).all(|j| !order[j].precedes(&order[i])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueueMode {
    Correct,
    /// One element is lost or delivered twice.
    Bug,
}

/// Settings of a queue workload: `producers` processes push `nops` values
/// each and `consumers` processes pop `nops` times each.
#[derive(Clone, Copy, Debug)]
pub struct QueueWorkload {
    pub producers: i64,
    pub consumers: i64,
    pub nops: usize,
    /// Probability that the scheduler switches to a random process instead
    /// of letting the last one continue.
    pub jitter: f64,
    pub mode: QueueMode,
}

impl QueueWorkload {
    pub fn new(nops: usize, mode: QueueMode) -> Self {
        QueueWorkload {
            producers: 2,
            consumers: 2,
            nops,
            jitter: 0.7,
            mode,
        }
    }

    pub fn ops_per_history(&self) -> usize {
        (self.producers + self.consumers) as usize * self.nops
    }
}

/// Simulates a concurrent FIFO queue. Every operation is invoked, takes
/// effect atomically at some later step and then responds; steps of
/// different processes interleave at random. Processes `1..=producers`
/// push, the others pop. In bug mode one pop leaves its element in the
/// queue, so it is delivered twice; if no second delivery happens, the
/// last successful pop returns a value that was never pushed instead.
pub fn simulate(w: &QueueWorkload, rng: &mut impl Rng) -> Vec<OpEvent> {
    #[derive(Clone, Copy, PartialEq)]
    enum Phase {
        Idle,
        Invoked,
        Applied,
    }
    let procs = (w.producers + w.consumers) as usize;
    let mut remaining = alloc::vec![w.nops; procs];
    let mut phase = alloc::vec![Phase::Idle; procs];
    let mut current: Vec<Option<OpEvent>> = alloc::vec![None; procs];
    let mut queue = VecDeque::new();
    let mut next_value = 1;
    let mut clock = 0;
    let mut out = Vec::new();
    let mut last = 0usize;
    let total_pops = w.consumers as usize * w.nops;
    let faulty_pop = match w.mode {
        QueueMode::Bug => Some(rng.gen_range(0..total_pops.max(1) / 2 + 1)),
        QueueMode::Correct => None,
    };
    let mut pops_applied = 0;
    let mut faulted = false;
    loop {
        let active: Vec<usize> = (0..procs).filter(|&p| remaining[p] > 0).collect();
        if active.is_empty() {
            break;
        }
        let p = if active.contains(&last) && !rng.gen_bool(w.jitter) {
            last
        } else {
            active[rng.gen_range(0..active.len())]
        };
        last = p;
        let proc = p as i64 + 1;
        match phase[p] {
            Phase::Idle => {
                clock += 1;
                let op = if proc <= w.producers {
                    Op::Push
                } else {
                    Op::Pop
                };
                current[p] = Some(OpEvent::new(proc, op, None, clock, 0));
                phase[p] = Phase::Invoked;
            }
            Phase::Invoked => {
                let e = current[p].as_mut().unwrap();
                match e.op {
                    Op::Push => {
                        e.param = Some(next_value);
                        queue.push_back(next_value);
                        next_value += 1;
                    }
                    Op::Pop => {
                        let duplicate =
                            !faulted && faulty_pop == Some(pops_applied) && !queue.is_empty();
                        e.param = if duplicate {
                            faulted = true;
                            queue.front().copied()
                        } else {
                            queue.pop_front()
                        };
                        pops_applied += 1;
                    }
                }
                phase[p] = Phase::Applied;
            }
            Phase::Applied => {
                clock += 1;
                let mut e = current[p].take().unwrap();
                e.response = clock;
                out.push(e);
                phase[p] = Phase::Idle;
                remaining[p] -= 1;
            }
        }
    }
    out.sort_by_key(|e| e.invoke);
    if w.mode == QueueMode::Bug {
        let mut counts = BTreeMap::new();
        for e in out.iter().filter(|e| e.op == Op::Pop) {
            if let Some(v) = e.param {
                *counts.entry(v).or_insert(0) += 1;
            }
        }
        if !counts.values().any(|&n| n > 1) {
            if let Some(e) = out
                .iter_mut()
                .rev()
                .find(|e| e.op == Op::Pop && e.param.is_some())
            {
                e.param = Some(-1);
            } else if let Some(e) = out.iter_mut().rev().find(|e| e.op == Op::Pop) {
                e.param = Some(-1);
            }
        }
    }
    out
}

/// Random histories, deterministic in the seed. Trace ids are `h0`, `h1`, ...
pub fn gen_queue_histories(seed: u64, w: &QueueWorkload, count: usize) -> Vec<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let ops = simulate(w, &mut rng);
            Trace::complete(
                &format!("h{k}"),
                ops.iter().map(OpEvent::to_valuation).collect::<Vec<_>>(),
            )
        })
        .collect()
}

/// A history trace from operations, in the given order.
pub fn history_trace(id: &str, ops: &[OpEvent]) -> Trace {
    Trace::complete(
        id,
        ops.iter().map(OpEvent::to_valuation).collect::<Vec<_>>(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn push(proc: i64, v: i64, i: i64, r: i64) -> OpEvent {
        OpEvent::new(proc, Op::Push, Some(v), i, r)
    }

    fn pop(proc: i64, v: Param, i: i64, r: i64) -> OpEvent {
        OpEvent::new(proc, Op::Pop, v, i, r)
    }

    #[test]
    fn reference_queue_basics() {
        let mut q = reference_queue();
        assert!(q.apply(Op::Push, Some(1)));
        assert!(q.apply(Op::Push, Some(2)));
        assert!(q.apply(Op::Pop, Some(1)));
        q.reset();
        assert!(q.apply(Op::Pop, None));
        assert!(!q.apply(Op::Pop, Some(3)));
    }

    #[test]
    fn linearization_examples() {
        let seq = [push(1, 1, 0, 1), pop(2, Some(1), 2, 3)];
        assert_eq!(linearize(&seq).unwrap(), Some(seq.to_vec()));
        let bad = [pop(2, Some(1), 0, 1), push(1, 1, 2, 3)];
        assert_eq!(linearize(&bad).unwrap(), None);
        assert_eq!(brute_force_linearization(&bad), None);
        let h = [
            push(1, 1, 0, 3),
            push(2, 2, 1, 2),
            pop(3, Some(2), 4, 5),
            pop(3, Some(1), 6, 7),
        ];
        let expected = [h[1], h[0], h[2], h[3]];
        assert_eq!(linearize(&h).unwrap(), Some(expected.to_vec()));
        assert_eq!(brute_force_linearization(&h), Some(expected.to_vec()));
    }

    #[test]
    fn malformed_histories_are_rejected() {
        assert!(linearize(&[push(1, 1, 3, 2)]).is_err());
        assert!(linearize(&[push(1, 1, 0, 2), push(2, 2, 2, 3)]).is_err());
    }

    #[test]
    fn exceeds_counts_the_size() {
        let three = sequential_trace("s", &[push(1, 1, 0, 1), push(1, 2, 2, 3), push(1, 3, 4, 5)]);
        assert!(exceeds(&three, 2));
        assert!(!exceeds(&three, 3));
        let alt = sequential_trace(
            "s",
            &[
                push(1, 1, 0, 1),
                pop(2, Some(1), 2, 3),
                push(1, 2, 4, 5),
                pop(2, Some(2), 6, 7),
            ],
        );
        assert!(!exceeds(&alt, 2));
        assert_eq!(alt.event(1).unwrap().get("size"), Some(&Value::Int(0)));
    }

    #[test]
    fn legal_replays() {
        assert!(legal(&Trace::complete("e", [])));
        assert!(!legal(&sequential_trace(
            "s",
            &[push(1, 1, 0, 1), pop(2, Some(2), 2, 3)]
        )));
    }

    #[test]
    fn simulated_histories() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let correct = QueueWorkload::new(3, QueueMode::Correct);
        for _ in 0..30 {
            let h = simulate(&correct, &mut rng);
            assert_eq!(h.len(), 12);
            check_history(&h).unwrap();
            let lin = linearize(&h).unwrap().expect("correct histories linearize");
            assert!(respects_happens_before(&lin));
            assert!(replays(&mut reference_queue(), &lin));
        }
        let bug = QueueWorkload::new(3, QueueMode::Bug);
        for _ in 0..30 {
            assert_eq!(linearize(&simulate(&bug, &mut rng)).unwrap(), None);
        }
    }
}
