//! The acceptance criteria, one PASS or FAIL line each. Runs without the
//! test harness so the lines are always printed; exits non-zero if any
//! criterion fails.

use std::collections::{BTreeSet, VecDeque};
use std::panic;
use std::sync::Arc;
use std::time::{Duration, Instant};

use hypermon::bench::{self, median};
use hypermon_core::formula::TraceFormula;
use hypermon_core::generators::{GeneratorRegistry, Lin};
use hypermon_core::oracle::random::{
    letter, letters_domain, random_instance, random_reading_side, random_trace,
    random_trace_formula, Instance,
};
use hypermon_core::oracle::{Assignment, Oracle};
use hypermon_core::scenarios::queue::{history_trace, linearize, Op, OpEvent, QueueMode};
use hypermon_core::scenarios::robot::OdSystem;
use hypermon_core::trace::{word, DataDomain, Delta, Value};
use hypermon_core::transducer::reference::{prefix_related, transducer_outputs};
use hypermon_core::transducer::{
    compile_atom, compose_sequential, concat, constant, eliminate_epsilon, identity_transducer,
    product, projection_transducer, stats, stutter_transducer, total_slice_transducer, translate,
    AtomRun, AtomStatus, PrefixAutomaton, TapeView, Transducer,
};
use hypermon_core::{Formula, Monitor, MonitorConfig, Observation, Trace, Verdict};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    }};
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("oracle equivalence", oracle_equivalence),
        ("automata soundness", automata_soundness),
        ("register automaton example", register_example),
        ("OD speedup", od_speedup),
        ("opacity", opacity),
        ("linearizability", linearizability),
        ("invariants and rule coverage", invariants),
    ];
    let quiet_panics = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail} [{secs:.1}s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {why} [{secs:.1}s]", k + 1);
            }
        }
    }
    panic::set_hook(quiet_panics);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn monitor_for(inst: &Instance, f: &Formula) -> Monitor {
    let names = f.generators().into_iter().map(|(n, _)| n);
    let reg = GeneratorRegistry::from_interp(&inst.sigma, names);
    Monitor::new(f, Arc::new(letters_domain()), reg, MonitorConfig::default()).unwrap()
}

fn batch_verdict(inst: &Instance, f: &Formula) -> Verdict {
    let obs = Observation::closed_from(inst.traces.clone()).unwrap();
    monitor_for(inst, f).run(&obs).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let d = letters_domain();
    let oracle = Oracle::new(&d);
    let start = Instant::now();
    let seeds = 50_000..51_000u64;
    let n = seeds.end - seeds.start;
    let mut holds = 0;
    for seed in seeds {
        let inst = random_instance(seed);
        ensure!(inst.traces.len() <= 3, "seed {seed}: too many traces");
        ensure!(
            inst.traces
                .iter()
                .all(|t| t.len() <= 5 && t.is_terminated()),
            "seed {seed}: trace shape"
        );
        let m = monitor_for(&inst, &inst.formula);
        let polarities: Vec<_> = m.prenex().quantifiers.iter().map(|q| q.polarity).collect();
        let alternations = polarities.windows(2).filter(|w| w[0] != w[1]).count();
        ensure!(
            alternations <= 1,
            "seed {seed}: {alternations} quantifier alternations"
        );
        let expected = oracle
            .eval(&inst.formula, &inst.traces, &inst.sigma)
            .map_err(|e| e.to_string())?;
        let got = batch_verdict(&inst, &inst.formula);
        ensure!(
            got == Verdict::from_bool(expected),
            "seed {seed}: monitor {got}, oracle {expected}: {}",
            inst.formula
        );
        holds += expected as u64;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    Ok(format!(
        "{n} instances agree ({holds} true), {:.1}s",
        elapsed.as_secs_f64()
    ))
}

/// Every word over `alphabet` of length at most `max`.
fn words(alphabet: &[&str], max: usize) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<Value>> = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for c in alphabet {
                let mut w2 = w.clone();
                w2.push(Value::Event(letter(c)));
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn tape(t: &Trace, k: usize) -> TapeView<'_> {
    TapeView::new(&t.letters()[..k.min(t.len())], k >= t.len())
}

/// Feeds both traces letter by letter until both are terminated.
fn run_on(a: Arc<PrefixAutomaton>, left: &Trace, right: &Trace, d: &DataDomain) -> AtomStatus {
    let mut run = AtomRun::new(a);
    let mut status = AtomStatus::Pending;
    for k in 0..=left.len().max(right.len()) + 1 {
        status = run.advance(tape(left, k), tape(right, k), d);
    }
    status
}

fn star_free_side(rng: &mut ChaCha8Rng) -> TraceFormula {
    loop {
        let tf = random_reading_side(rng, "p", 2, 2, true);
        if !tf.has_star() {
            return tf;
        }
    }
}

fn compiled(tf: &TraceFormula, d: &DataDomain) -> Transducer {
    eliminate_epsilon(&translate(tf, d).unwrap(), d)
}

fn random_atoms(
    rng: &mut ChaCha8Rng,
    n: usize,
    mut each: impl FnMut(&TraceFormula, &TraceFormula),
) {
    for _ in 0..n {
        let alphabet = rng.gen_range(2..=3);
        let lhs = random_reading_side(rng, "p", 3, alphabet, true);
        let rhs = if rng.gen_bool(0.8) {
            random_reading_side(rng, "q", 3, alphabet, true)
        } else {
            random_trace_formula(rng, None, 3, alphabet, true)
        };
        each(&lhs, &rhs);
    }
}

fn automata_soundness() -> Outcome {
    let d = letters_domain();
    let oracle = Oracle::new(&d);
    let mut rng = ChaCha8Rng::seed_from_u64(90_210);
    let mut atoms = 0;
    let mut accepted = 0;
    let mut failure = None;
    random_atoms(&mut rng.clone(), 600, |lhs, rhs| {
        if failure.is_some() {
            return;
        }
        let mut r = ChaCha8Rng::seed_from_u64(atoms as u64);
        let alphabet = 3;
        let p = random_trace(&mut r, "p", 5, alphabet);
        let q = random_trace(&mut r, "q", 5, alphabet);
        let a = match compile_atom(lhs, rhs, &d) {
            Ok(a) => Arc::new(a),
            Err(e) => {
                failure = Some(format!("{lhs} <= {rhs}: {e}"));
                return;
            }
        };
        let left = if lhs.vars().iter().any(|v| &**v == "q") {
            &q
        } else {
            &p
        };
        let right = if rhs.vars().iter().any(|v| &**v == "p") {
            &p
        } else {
            &q
        };
        let status = run_on(a, left, right, &d);
        let mut asg = Assignment::new();
        asg.insert(Arc::from("p"), Arc::new(p.clone()));
        asg.insert(Arc::from("q"), Arc::new(q.clone()));
        let expected = oracle.atom(lhs, rhs, &asg).unwrap();
        if status == AtomStatus::Pending || (status == AtomStatus::Accepted) != expected {
            failure = Some(format!(
                "{lhs} <= {rhs}: automaton {status:?}, oracle {expected}"
            ));
        }
        accepted += expected as usize;
        atoms += 1;
    });
    if let Some(f) = failure {
        return Err(f);
    }

    let inputs = words(&["a", "b"], 4);
    let seconds = [
        ("stutter", stutter_transducer()),
        ("identity", identity_transducer()),
        ("[1:2]", total_slice_transducer(1, 2)),
        ("[-2:-1]", total_slice_transducer(-2, -1)),
    ];
    let mut compositions = 0;
    for _ in 0..20 {
        let tf = star_free_side(&mut rng);
        let first = compiled(&tf, &d);
        for (name, second) in &seconds {
            let composed = compose_sequential(&first, second, &d).map_err(|e| e.to_string())?;
            for w in &inputs {
                let direct = transducer_outputs(&composed, w, &d, 32);
                let mut staged = BTreeSet::new();
                for u in transducer_outputs(&first, w, &d, 32) {
                    staged.extend(transducer_outputs(second, &u, &d, 32));
                }
                ensure!(direct == staged, "{name} after {tf} on {w:?}");
                compositions += 1;
            }
        }
    }

    let mut products = 0;
    for _ in 0..15 {
        let lhs = star_free_side(&mut rng);
        let rhs = star_free_side(&mut rng);
        let (t1, t2) = (compiled(&lhs, &d), compiled(&rhs, &d));
        let a = Arc::new(product(&t1, &t2, &d));
        for l in &inputs {
            for r in &inputs {
                let mut run = AtomRun::new(a.clone());
                let status = run.advance(TapeView::new(l, true), TapeView::new(r, true), &d);
                let expected = prefix_related(&t1, &t2, l, r, &d, 32);
                ensure!(
                    status != AtomStatus::Pending && (status == AtomStatus::Accepted) == expected,
                    "{lhs} <= {rhs} on {l:?} / {r:?}"
                );
                products += 1;
            }
        }
    }
    Ok(format!(
        "{atoms} atoms agree with the oracle ({accepted} accepted), {compositions} composition and {products} product checks"
    ))
}

fn syms(w: &[Value]) -> Vec<Value> {
    w.iter()
        .map(|e| e.as_event().unwrap().get("x").unwrap().clone())
        .collect()
}

/// The hand-drawn register automaton for the example atom on a pair of
/// words: the
/// store `r := a`, then a loop on letters equal to `r` and a loop on
/// letters that differ from `r` and match the right tape, storing them.
/// The drawing labels the first loop as reading both tapes. The left
/// transducer emits nothing on that step, so its product transition reads
/// the left tape only; `literal` follows the label instead.
fn drawn_accepts(left: &[Value], right: &[Value], literal: bool) -> bool {
    let (mut i, mut j) = (0, 0);
    let mut r = Value::sym("a");
    while i < left.len() {
        let y = &left[i];
        let x = right.get(j);
        if *y == r && !literal {
            i += 1;
        } else if x == Some(y) {
            r = y.clone();
            i += 1;
            j += 1;
        } else {
            return false;
        }
    }
    true
}

/// `stutter("a" ; x(p)) <= "a" ; x(q)`, checked against the drawn automaton
/// and the semantics on every pair of words up to length four.
fn register_example() -> Outcome {
    let d = letters_domain();
    let a = || TraceFormula::constant(Value::sym("a"));
    let lhs = TraceFormula::stutter(TraceFormula::concat(a(), TraceFormula::proj("x", "p")));
    let rhs = TraceFormula::concat(a(), TraceFormula::proj("x", "q"));
    let automaton = Arc::new(compile_atom(&lhs, &rhs, &d).map_err(|e| e.to_string())?);
    let inputs = words(&["a", "b"], 4);
    let (mut pairs, mut accepted, mut literal_wrong) = (0, 0, 0);
    for l in &inputs {
        for r in &inputs {
            let p = Trace::complete("p", l.iter().map(|e| e.as_event().unwrap().clone()));
            let q = Trace::complete("q", r.iter().map(|e| e.as_event().unwrap().clone()));
            let ours = run_on(automaton.clone(), &p, &q, &d) == AtomStatus::Accepted;
            let (ls, rs) = (syms(l), syms(r));
            let drawn = drawn_accepts(&ls, &rs, false);
            let mut al = vec![Value::sym("a")];
            al.extend(ls.iter().cloned());
            let mut ar = vec![Value::sym("a")];
            ar.extend(rs.iter().cloned());
            let truth = word::is_prefix(&word::stutter_reduce(&al), &ar);
            ensure!(
                ours == drawn,
                "on {ls:?} / {rs:?}: compiled {ours}, drawn automaton {drawn}"
            );
            ensure!(
                ours == truth,
                "on {ls:?} / {rs:?}: compiled {ours}, semantics {truth}"
            );
            pairs += 1;
            accepted += ours as usize;
            literal_wrong += (drawn_accepts(&ls, &rs, true) != truth) as usize;
        }
    }
    Ok(format!(
        "{pairs} pairs, {accepted} accepted, identical to the drawn automaton; \
         reading its first loop label literally would misjudge {literal_wrong} pairs"
    ))
}

fn od_speedup() -> Outcome {
    let start = Instant::now();
    let grid = OdSystem::new(1, 0.5).grid;
    ensure!(
        grid.width == 10 && grid.height == 10,
        "grid is {}x{}",
        grid.width,
        grid.height
    );
    let (mut with, mut without) = (Vec::new(), Vec::new());
    for seed in 0..10 {
        let a = bench::od_trial(seed, 200, 4, Some(5)).map_err(|e| e.to_string())?;
        let b = bench::od_trial(seed, 200, 4, None).map_err(|e| e.to_string())?;
        ensure!(
            a.verdict == Verdict::False,
            "seed {seed}: sampling monitor says {}",
            a.verdict
        );
        ensure!(
            b.verdict == Verdict::False,
            "seed {seed}: observed-only monitor says {}",
            b.verdict
        );
        with.push(a.decided_after.unwrap() as f64);
        without.push(b.decided_after.unwrap() as f64);
    }
    let (m1, m2) = (median(&mut with), median(&mut without));
    let elapsed = start.elapsed();
    ensure!(m1 <= 5.0, "sampling median {m1}");
    ensure!(m2 >= 4.0 * m1, "observed-only median {m2} vs sampling {m1}");
    ensure!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    Ok(format!(
        "median traces to violation: {m1} with samples(n=5), {m2} without ({:.0}x)",
        m2 / m1
    ))
}

fn opacity() -> Outcome {
    let budget = Some(Duration::from_secs(30));
    let one = bench::opacity_run("opaque", "1w", 8, 8, 100, budget).map_err(|e| e.to_string())?;
    ensure!(
        one.verdict != Verdict::False,
        "opaque system reported a violation"
    );
    ensure!(
        one.processed >= 100,
        "only {} traces within 30s",
        one.processed
    );
    ensure!(one.wall < Duration::from_secs(30), "took {:?}", one.wall);
    let bad =
        bench::opacity_run("non-opaque", "1w", 8, 8, 100, budget).map_err(|e| e.to_string())?;
    ensure!(
        bad.verdict == Verdict::False,
        "non-opaque system: {}",
        bad.verdict
    );
    let all = bench::opacity_run("opaque", "aat", 8, 8, 100, budget).map_err(|e| e.to_string())?;
    ensure!(
        all.verdict != Verdict::False,
        "AAT reported a violation on the opaque system"
    );
    ensure!(
        one.cpu < all.cpu,
        "1W cpu {:?} is not below AAT cpu {:?}",
        one.cpu,
        all.cpu
    );
    Ok(format!(
        "1W: {} traces, verdict {}, {:.0} ms cpu; AAT: {:.0} ms cpu; non-opaque violated after {} traces",
        one.processed,
        one.verdict,
        one.cpu.as_secs_f64() * 1e3,
        all.cpu.as_secs_f64() * 1e3,
        bad.decided_after.map_or("?".into(), |n| n.to_string())
    ))
}

/// A random history of at most `max` operations by three processes, each
/// process running its operations one after another. Timestamps are
/// distinct.
fn random_history(rng: &mut impl Rng, max: usize) -> Vec<OpEvent> {
    let n = rng.gen_range(1..=max);
    let mut free_at = [0i64; 4];
    let mut ops = Vec::new();
    let mut stamps = Vec::new();
    for k in 0..n {
        let proc = rng.gen_range(1..=3);
        let invoke = free_at[proc as usize] + rng.gen_range(0..4);
        let response = invoke + rng.gen_range(1..6);
        free_at[proc as usize] = response + 1;
        let (op, param) = if rng.gen_bool(0.5) {
            (Op::Push, Some(rng.gen_range(1..=2)))
        } else {
            (
                Op::Pop,
                if rng.gen_bool(0.8) {
                    Some(rng.gen_range(1..=2))
                } else {
                    None
                },
            )
        };
        ops.push(OpEvent::new(proc, op, param, 0, 0));
        stamps.push((invoke * 2, k, true));
        stamps.push((response * 2 + 1, k, false));
    }
    stamps.sort();
    for (t, &(_, k, is_invoke)) in stamps.iter().enumerate() {
        if is_invoke {
            ops[k].invoke = t as i64;
        } else {
            ops[k].response = t as i64;
        }
    }
    ops
}

/// Searches all orders that respect happens-before for one that replays
/// on a FIFO queue.
fn linearizable(ops: &[OpEvent]) -> bool {
    fn go(rest: &mut Vec<OpEvent>, queue: &mut VecDeque<i64>) -> bool {
        if rest.is_empty() {
            return true;
        }
        for k in 0..rest.len() {
            let e = rest[k];
            if rest.iter().any(|o| o.response < e.invoke) {
                continue;
            }
            let saved = queue.clone();
            let ok = match (e.op, e.param) {
                (Op::Push, Some(v)) => {
                    queue.push_back(v);
                    true
                }
                (Op::Push, None) => false,
                (Op::Pop, p) => queue.pop_front() == p,
            };
            if ok {
                rest.remove(k);
                let found = go(rest, queue);
                rest.insert(k, e);
                if found {
                    return true;
                }
            }
            *queue = saved;
        }
        false
    }
    go(&mut ops.to_vec(), &mut VecDeque::new())
}

fn linearizability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut good, mut bad) = (Vec::new(), Vec::new());
    while good.len() < 10 || bad.len() < 10 {
        let ops = random_history(&mut rng, 6);
        if ops.len() < 3 {
            continue;
        }
        let bucket = if linearizable(&ops) {
            &mut good
        } else {
            &mut bad
        };
        if bucket.len() < 10 {
            bucket.push(ops);
        }
    }
    for (expected, fixtures) in [(true, &good), (false, &bad)] {
        for (k, ops) in fixtures.iter().enumerate() {
            let trace = history_trace(&format!("h{k}"), ops);
            for f in ["lin", "lin-legal"] {
                let r =
                    bench::lin_on(f, std::slice::from_ref(&trace)).map_err(|e| e.to_string())?;
                ensure!(
                    r.verdict == Verdict::from_bool(expected),
                    "{f} on fixture {k} ({} ops, linearizable: {expected}): {}",
                    ops.len(),
                    r.verdict
                );
            }
        }
    }
    let start = Instant::now();
    let big = bench::lin_run("lin", 50, QueueMode::Correct, 1, 3).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(
        big.verdict == Verdict::True,
        "nops=50 correct histories: {}",
        big.verdict
    );
    ensure!(
        elapsed < Duration::from_secs(60),
        "nops=50 took {elapsed:?}"
    );
    Ok(format!(
        "10 linearizable and 10 non-linearizable fixtures classified by both formulas; nops=50 histories true in {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn shuffled_deltas(traces: &[Trace], rng: &mut impl Rng) -> Vec<Delta> {
    let mut queues: Vec<Vec<Delta>> = traces
        .iter()
        .map(|t| {
            let mut q = vec![Delta::AddTrace(t.id().clone())];
            q.extend(t.events().map(|e| Delta::Append(t.id().clone(), e.clone())));
            q.push(Delta::Terminate(t.id().clone()));
            q.reverse();
            q
        })
        .collect();
    let mut out = Vec::new();
    loop {
        let live: Vec<usize> = (0..queues.len())
            .filter(|&i| !queues[i].is_empty())
            .collect();
        let Some(&i) = live.choose(rng) else { break };
        out.push(queues[i].pop().unwrap());
    }
    out.push(Delta::Close);
    out
}

fn invariants() -> Outcome {
    let d = letters_domain();
    let oracle = Oracle::new(&d);

    let twice = compose_sequential(&stutter_transducer(), &stutter_transducer(), &d)
        .map_err(|e| e.to_string())?;
    for w in words(&["a", "b", "c"], 5) {
        let once = transducer_outputs(&stutter_transducer(), &w, &d, 16);
        ensure!(
            transducer_outputs(&twice, &w, &d, 16) == once,
            "stutter twice differs on {w:?}"
        );
        let reduced = word::stutter_reduce(&w);
        ensure!(
            once.into_iter().collect::<Vec<_>>() == vec![reduced.clone()],
            "stutter output on {w:?}"
        );
        ensure!(
            word::stutter_reduce(&reduced) == reduced,
            "stutter reduction not idempotent on {w:?}"
        );
    }

    for w in words(&["a", "b"], 4) {
        for i in -5..=5 {
            for j in -5..=5 {
                let outs = transducer_outputs(&total_slice_transducer(i, j), &w, &d, 16);
                ensure!(
                    outs.len() == 1 && outs.iter().next().unwrap() == word::slice(&w, i, j),
                    "slice [{i}:{j}] on {w:?}"
                );
            }
        }
    }

    for seed in 0..300 {
        let inst = random_instance(70_000 + seed);
        let f = &inst.formula;
        ensure!(&f.negate().negate() == f, "double negation of {f}");
        let pos = oracle.eval(f, &inst.traces, &inst.sigma).unwrap();
        let neg = oracle.eval(&f.negate(), &inst.traces, &inst.sigma).unwrap();
        ensure!(pos != neg, "oracle: {f} and its negation agree");
        ensure!(
            batch_verdict(&inst, &f.negate()) == batch_verdict(&inst, f).negate(),
            "monitor: negation of {f}"
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for seed in 0..150 {
        let inst = random_instance(80_000 + seed);
        let mut m = monitor_for(&inst, &inst.formula);
        let mut obs = Observation::new();
        let mut settled: Option<Verdict> = None;
        for delta in shuffled_deltas(&inst.traces, &mut rng) {
            obs.apply(delta).unwrap();
            let v = m.run(&obs).unwrap();
            match settled {
                Some(s) => ensure!(v == s, "seed {seed}: verdict {s} changed to {v}"),
                None if v.is_conclusive() => settled = Some(v),
                None => {}
            }
        }
        ensure!(
            settled.is_some(),
            "seed {seed}: no verdict on the closed observation"
        );
    }

    let mut reg = GeneratorRegistry::new().with("lin", Lin);
    for k in 0..100 {
        let ops = random_history(&mut rng, 5);
        let full = history_trace(&format!("g{k}"), &ops);
        let mut t = Trace::new(full.id());
        let mut previous: Vec<Arc<Trace>> = Vec::new();
        for n in 0..=full.len() {
            if n == full.len() {
                t.terminate();
            } else {
                t.push(full.event(n).unwrap().clone()).unwrap();
            }
            let snap = reg.query("lin", &[&t]).map_err(|e| e.to_string())?;
            ensure!(
                snap.traces.starts_with(&previous),
                "lin snapshot shrank on history {k}"
            );
            previous = snap.traces;
        }
    }

    for k in 0..400 {
        let ops = random_history(&mut rng, 6);
        let fast = linearize(&ops).map_err(|e| e.to_string())?.is_some();
        ensure!(
            fast == linearizable(&ops),
            "history {k}: linearize says {fast}"
        );
    }

    random_atoms(&mut ChaCha8Rng::seed_from_u64(5), 300, |lhs, rhs| {
        let _ = compile_atom(lhs, rhs, &d);
    });
    let emit_first = concat(&constant(Value::sym("b")), &identity_transducer());
    let _ = compose_sequential(&identity_transducer(), &emit_first, &d);
    let x = projection_transducer(d.projection_id("x").unwrap());
    let _ = compose_sequential(&constant(Value::sym("a")), &x, &d);
    let coverage = stats::coverage();
    let missing: Vec<_> = stats::ALL_RULES
        .iter()
        .filter(|r| stats::count(**r) == 0)
        .collect();
    ensure!(
        coverage >= 0.95,
        "rule coverage {coverage:.2}, never used: {missing:?}"
    );
    Ok(format!(
        "stutter, slices, negation, stability, snapshots and linearization checks pass; {:.0}% of {} construction rules used",
        coverage * 100.0,
        stats::ALL_RULES.len()
    ))
}
