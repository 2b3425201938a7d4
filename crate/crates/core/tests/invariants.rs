use std::sync::Arc;

use hypermon_core::generators::{GeneratorRegistry, Lin, Sub};
use hypermon_core::oracle::random::{letters_domain, random_instance};
use hypermon_core::oracle::Oracle;
use hypermon_core::scenarios::queue::{
    brute_force_linearization, history_trace, linearize, reference_queue, replays,
    respects_happens_before, simulate, Op, OpEvent, QueueMode, QueueWorkload,
};
use hypermon_core::{Trace, Valuation};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Up to six operations with distinct timestamps and small values.
fn history() -> impl Strategy<Value = Vec<OpEvent>> {
    let op = (
        1i64..=3,
        prop::bool::ANY,
        prop::option::weighted(0.8, 1i64..=3),
        0usize..12,
        1usize..6,
    );
    prop::collection::vec(op, 0..=6).prop_map(|raw| {
        let mut stamps: Vec<(usize, usize, bool)> = Vec::new();
        for (k, &(.., at, dur)) in raw.iter().enumerate() {
            stamps.push((at * 2, k, true));
            stamps.push((at * 2 + dur * 2 + 1, k, false));
        }
        stamps.sort();
        let mut inv = vec![0; raw.len()];
        let mut res = vec![0; raw.len()];
        for (t, &(_, k, is_inv)) in stamps.iter().enumerate() {
            if is_inv {
                inv[k] = t as i64;
            } else {
                res[k] = t as i64;
            }
        }
        raw.iter()
            .enumerate()
            .map(|(k, &(proc, push, v, ..))| {
                let (op, param) = if push {
                    (Op::Push, Some(v.unwrap_or(1)))
                } else {
                    (Op::Pop, v)
                };
                OpEvent::new(proc, op, param, inv[k], res[k])
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn linearize_agrees_with_brute_force(ops in history()) {
        let fast = linearize(&ops).unwrap();
        let slow = brute_force_linearization(&ops);
        prop_assert_eq!(fast.is_some(), slow.is_some());
        if let Some(order) = fast {
            prop_assert_eq!(order.len(), ops.len());
            prop_assert!(respects_happens_before(&order));
            prop_assert!(replays(&mut reference_queue(), &order));
        }
    }

    #[test]
    fn oracle_negation_is_an_involution(seed in 0u64..100_000) {
        let inst = random_instance(seed);
        let d = letters_domain();
        let oracle = Oracle::new(&d);
        let f = &inst.formula;
        prop_assert_eq!(&f.negate().negate(), f);
        let pos = oracle.eval(f, &inst.traces, &inst.sigma).unwrap();
        let neg = oracle.eval(&f.negate(), &inst.traces, &inst.sigma).unwrap();
        prop_assert_eq!(pos, !neg);
        let p = f.prenex().unwrap();
        let n = f.negate().prenex().unwrap();
        prop_assert_eq!(p.quantifiers.len(), n.quantifiers.len());
        for (a, b) in p.quantifiers.iter().zip(&n.quantifiers) {
            prop_assert_eq!(&a.var, &b.var);
            prop_assert_eq!(a.polarity.flip(), b.polarity);
        }
        prop_assert!(n.check_monitorable().is_ok());
    }

    #[test]
    fn generator_snapshots_only_grow(len in 0usize..6, ops in history()) {
        let mut reg = GeneratorRegistry::new().with("sub", Sub).with("lin", Lin);
        let full = history_trace("h", &ops);
        let letters: Vec<Valuation> = (0..len as i64).map(|i| Valuation::from_pairs([("x", i)])).collect();
        for (name, source) in [("sub", Trace::complete("w", letters)), ("lin", full)] {
            let mut t = Trace::new(source.id());
            let mut previous: Vec<Arc<Trace>> = Vec::new();
            let mut closed = false;
            for k in 0..=source.len() {
                if k == source.len() {
                    t.terminate();
                } else {
                    t.push(source.event(k).unwrap().clone()).unwrap();
                }
                let snap = reg.query(name, &[&t]).unwrap();
                prop_assert!(!closed || snap.traces.len() == previous.len(), "{} grew after closing", name);
                prop_assert!(snap.traces.starts_with(&previous), "{} lost traces", name);
                closed = snap.closed;
                previous = snap.traces;
            }
            prop_assert!(closed);
        }
    }
}

#[test]
fn simulated_histories_are_classified_like_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut buggy_found = 0;
    for mode in [QueueMode::Correct, QueueMode::Bug] {
        for _ in 0..40 {
            let w = QueueWorkload {
                producers: 1,
                consumers: 1,
                ..QueueWorkload::new(3, mode)
            };
            let ops = simulate(&w, &mut rng);
            assert_eq!(ops.len(), 6);
            let lin = linearize(&ops).unwrap();
            assert_eq!(lin.is_some(), brute_force_linearization(&ops).is_some());
            if mode == QueueMode::Correct {
                assert!(lin.is_some());
            } else {
                buggy_found += lin.is_none() as usize;
            }
        }
    }
    assert!(buggy_found > 0);
}
