use std::collections::BTreeSet;
use std::sync::Arc;

use hypermon_core::oracle::random::{
    letter, letters_domain, random_reading_side, random_trace, random_trace_formula,
};
use hypermon_core::oracle::{Assignment, Oracle};
use hypermon_core::trace::{word, DataDomain, Trace, Value};
use hypermon_core::transducer::reference::{prefix_related, transducer_outputs};
use hypermon_core::transducer::{
    compile_atom, compose_sequential, concat, constant, eliminate_epsilon, identity_transducer,
    product, projection_transducer, stats, stutter_transducer, total_slice_transducer, translate,
    AtomRun, AtomStatus, CompileError, TapeView, Transducer,
};
use hypermon_core::TraceFormula;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tape(t: &Trace, k: usize) -> TapeView<'_> {
    TapeView::new(&t.letters()[..k.min(t.len())], k >= t.len())
}

fn run_atom(
    lhs: &TraceFormula,
    rhs: &TraceFormula,
    p: &Trace,
    q: &Trace,
    d: &DataDomain,
) -> Result<AtomStatus, CompileError> {
    let a = Arc::new(compile_atom(lhs, rhs, d)?);
    let lt = if lhs.vars().iter().any(|v| &**v == "q") {
        q
    } else {
        p
    };
    let rt = if rhs.vars().iter().any(|v| &**v == "p") {
        p
    } else {
        q
    };
    let mut run = AtomRun::new(a);
    let n = lt.len().max(rt.len());
    let mut status = AtomStatus::Pending;
    for k in 0..=n + 1 {
        status = run.advance(tape(lt, k), tape(rt, k), d);
    }
    Ok(status)
}

fn oracle_atom(
    lhs: &TraceFormula,
    rhs: &TraceFormula,
    p: &Trace,
    q: &Trace,
    d: &DataDomain,
) -> bool {
    let mut asg = Assignment::new();
    asg.insert(Arc::from("p"), Arc::new(p.clone()));
    asg.insert(Arc::from("q"), Arc::new(q.clone()));
    Oracle::new(d).atom(lhs, rhs, &asg).unwrap()
}

#[test]
fn compiled_atoms_agree_with_the_oracle() {
    let d = letters_domain();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    let mut accepted = 0;
    while checked
        < std::env::var("ATOM_CASES")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(600)
    {
        let alphabet = rng.gen_range(2..=3);
        let lhs = random_reading_side(&mut rng, "p", 3, alphabet, true);
        let rhs = if rng.gen_bool(0.8) {
            random_reading_side(&mut rng, "q", 3, alphabet, true)
        } else {
            random_trace_formula(&mut rng, None, 3, alphabet, true)
        };
        let p = random_trace(&mut rng, "p", 5, alphabet);
        let q = random_trace(&mut rng, "q", 5, alphabet);
        let status = run_atom(&lhs, &rhs, &p, &q, &d).unwrap();
        let expected = oracle_atom(&lhs, &rhs, &p, &q, &d);
        assert_ne!(status, AtomStatus::Pending, "{lhs} <= {rhs}");
        assert_eq!(
            status == AtomStatus::Accepted,
            expected,
            "{lhs} <= {rhs} on p={:?} q={:?}",
            p.letters(),
            q.letters()
        );
        accepted += expected as usize;
        checked += 1;
    }
    assert!(
        accepted * 6 > checked && accepted * 6 < checked * 5,
        "accepted {accepted}"
    );
}

/// Every word over `alphabet` of length at most `max`.
fn words(alphabet: &[&str], max: usize) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for c in alphabet {
                let mut w2: Vec<Value> = w.clone();
                w2.push(Value::Event(letter(c)));
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// A one-pass side over `p` without stars, so every input has finitely
/// many outputs.
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

#[test]
fn sequential_composition_relation_by_enumeration() {
    let d = letters_domain();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let inputs = words(&["a", "b"], 4);
    let seconds: Vec<(String, Transducer)> = vec![
        ("stutter".into(), stutter_transducer()),
        ("identity".into(), identity_transducer()),
        ("[1:2]".into(), total_slice_transducer(1, 2)),
        ("[-2:-1]".into(), total_slice_transducer(-2, -1)),
        ("[0]".into(), total_slice_transducer(0, 0)),
    ];
    for _ in 0..30 {
        let tf = star_free_side(&mut rng);
        let first = compiled(&tf, &d);
        for (name, second) in &seconds {
            let composed = compose_sequential(&first, second, &d).unwrap();
            for w in &inputs {
                let direct = transducer_outputs(&composed, w, &d, 32);
                let mut staged = BTreeSet::new();
                for u in transducer_outputs(&first, w, &d, 32) {
                    staged.extend(transducer_outputs(second, &u, &d, 32));
                }
                assert_eq!(direct, staged, "{name} after {tf} on {w:?}");
            }
        }
    }
}

#[test]
fn prefix_product_relation_by_enumeration() {
    let d = letters_domain();
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let inputs = words(&["a", "b"], 4);
    for _ in 0..25 {
        let lhs = star_free_side(&mut rng);
        let rhs = star_free_side(&mut rng);
        let (t1, t2) = (compiled(&lhs, &d), compiled(&rhs, &d));
        let a = Arc::new(product(&t1, &t2, &d));
        for l in &inputs {
            for r in &inputs {
                let mut run = AtomRun::new(a.clone());
                let status = run.advance(TapeView::new(l, true), TapeView::new(r, true), &d);
                let expected = prefix_related(&t1, &t2, l, r, &d, 32);
                assert_ne!(status, AtomStatus::Pending);
                assert_eq!(
                    status == AtomStatus::Accepted,
                    expected,
                    "{lhs} <= {rhs} on {l:?} / {r:?}"
                );
            }
        }
    }
}

#[test]
fn stutter_transducer_is_idempotent() {
    let d = letters_domain();
    let twice = compose_sequential(&stutter_transducer(), &stutter_transducer(), &d).unwrap();
    for w in words(&["a", "b", "c"], 5) {
        let once = transducer_outputs(&stutter_transducer(), &w, &d, 16);
        assert_eq!(transducer_outputs(&twice, &w, &d, 16), once);
        assert_eq!(
            once.into_iter().collect::<Vec<_>>(),
            vec![word::stutter_reduce(&w)]
        );
    }
}

#[test]
fn every_rule_of_the_constructions_fires() {
    let d = letters_domain();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let alphabet = rng.gen_range(2..=3);
        let lhs = random_reading_side(&mut rng, "p", 3, alphabet, true);
        let rhs = if rng.gen_bool(0.8) {
            random_reading_side(&mut rng, "q", 3, alphabet, true)
        } else {
            random_trace_formula(&mut rng, None, 3, alphabet, true)
        };
        compile_atom(&lhs, &rhs, &d).unwrap();
    }
    // A second operand that emits before reading, and one whose guard
    // cannot hold on a constant the first emits.
    let emit_first = concat(&constant(Value::sym("b")), &identity_transducer());
    compose_sequential(&identity_transducer(), &emit_first, &d).unwrap();
    let x = projection_transducer(d.projection_id("x").unwrap());
    compose_sequential(&constant(Value::sym("a")), &x, &d).unwrap();
    let missing: Vec<_> = stats::ALL_RULES
        .iter()
        .filter(|r| stats::count(**r) == 0)
        .collect();
    assert!(stats::coverage() >= 0.95, "rules never used: {missing:?}");
}

fn small_word() -> impl Strategy<Value = Vec<Value>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 0..8)
        .prop_map(|cs| cs.into_iter().map(Value::sym).collect())
}

proptest! {
    #[test]
    fn stutter_reduction_is_idempotent(w in small_word()) {
        let once = word::stutter_reduce(&w);
        prop_assert_eq!(word::stutter_reduce(&once), once.clone());
        prop_assert!(once.windows(2).all(|p| p[0] != p[1]));
    }

    #[test]
    fn total_slices_yield_exactly_one_output(w in small_word(), i in -6i64..=6, j in -6i64..=6) {
        let d = letters_domain();
        let outs = transducer_outputs(&total_slice_transducer(i, j), &w, &d, 16);
        prop_assert_eq!(outs.len(), 1);
        prop_assert_eq!(outs.into_iter().next().unwrap(), word::slice(&w, i, j).to_vec());
    }
}
