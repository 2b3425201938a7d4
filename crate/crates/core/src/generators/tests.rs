use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::scenarios::queue::{self, Op, OpEvent};
use crate::scenarios::robot::{self, Grid, OdSystem, OpacitySystem};
use crate::trace::{Valuation, Value};

fn ev(tp: &str, proc: i64, op: &str, param: i64) -> Valuation {
    Valuation::from_pairs([
        ("tp", Value::sym(tp)),
        ("proc", Value::Int(proc)),
        ("op", Value::sym(op)),
        ("param", Value::Int(param)),
    ])
}

fn letters(n: usize) -> Trace {
    Trace::complete(
        "t",
        (0..n).map(|i| Valuation::from_pairs([("x", Value::Int(i as i64))])),
    )
}

#[test]
fn sub_produces_all_prefixes() {
    let mut r = GeneratorRegistry::new().with("sub", Sub);
    let s = r.query("sub", &[&letters(2)]).unwrap();
    assert!(s.closed);
    let lens: Vec<usize> = s.traces.iter().map(|t| t.len()).collect();
    assert_eq!(lens, [0, 1, 2]);
    assert!(s.traces.iter().all(|t| t.is_terminated()));
}

#[test]
fn sub_grows_with_its_argument() {
    let mut r = GeneratorRegistry::new().with("sub", Sub);
    let mut t = Trace::new("t");
    let mut sizes = Vec::new();
    for i in 0..3 {
        let s = r.query("sub", &[&t]).unwrap();
        assert!(!s.closed);
        sizes.push(s.traces.len());
        t.push(Valuation::from_pairs([("x", Value::Int(i))]))
            .unwrap();
    }
    t.terminate();
    let s = r.query("sub", &[&t]).unwrap();
    assert!(s.closed);
    sizes.push(s.traces.len());
    assert_eq!(sizes, [1, 2, 3, 4]);
    // Later snapshots extend earlier ones.
    let again = r.query_from("sub", &[&t], 2).unwrap();
    assert_eq!(again.traces[..], s.traces[2..]);
}

#[test]
fn ext_completes_pending_invocations() {
    let ext = Ext::new(alloc::vec![
        Value::Int(1),
        Value::Int(2),
        Value::sym("empty")
    ])
    .unwrap();
    let complete = Trace::complete("h", [ev("inv", 1, "push", 1), ev("res", 1, "push", 1)]);
    let out = ext.extensions(&complete).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].letters(), complete.letters());
    let pending = Trace::complete("h", [ev("inv", 1, "push", 1), ev("inv", 2, "pop", 0)]);
    let out = ext.extensions(&pending).unwrap();
    assert_eq!(out.len(), 9);
    let one = Trace::complete(
        "h",
        [
            ev("inv", 1, "push", 1),
            ev("res", 1, "push", 1),
            ev("inv", 2, "pop", 0),
        ],
    );
    let out = ext.extensions(&one).unwrap();
    assert_eq!(out.len(), 3);
    for t in &out {
        assert_eq!(t.len(), 4);
        assert_eq!(&t.letters()[..3], one.letters());
        assert_eq!(t.event(3).unwrap().get("tp"), Some(&Value::sym("res")));
    }
    assert!(Ext::new(Vec::new()).is_err());
    let bad = Trace::complete("h", [ev("res", 1, "push", 1)]);
    assert!(matches!(ext.extensions(&bad), Err(GenError::Malformed(_))));
}

fn op(proc: i64, o: Op, param: Option<i64>, i: i64, r: i64) -> OpEvent {
    OpEvent::new(proc, o, param, i, r)
}

#[test]
fn lin_and_legal() {
    let mut r = GeneratorRegistry::new()
        .with("lin", Lin)
        .with("legal", Legal);
    let h = queue::history_trace(
        "h",
        &[
            op(1, Op::Push, Some(1), 0, 3),
            op(2, Op::Push, Some(2), 1, 2),
            op(3, Op::Pop, Some(2), 4, 5),
            op(3, Op::Pop, Some(1), 6, 7),
        ],
    );
    let s = r.query("lin", &[&h]).unwrap();
    assert!(s.closed);
    assert_eq!(s.traces.len(), 1);
    let l = s.traces[0].clone();
    let params: Vec<_> = l
        .events()
        .map(|e| e.get("param").cloned().unwrap())
        .collect();
    assert_eq!(
        params,
        [Value::Int(2), Value::Int(1), Value::Int(2), Value::Int(1)]
    );
    let c = r.query("legal", &[&l]).unwrap();
    assert_eq!(c.traces.len(), 1);
    assert_eq!(c.traces[0].letters(), l.letters());

    let bad = queue::history_trace(
        "b",
        &[
            op(2, Op::Pop, Some(1), 0, 1),
            op(1, Op::Push, Some(1), 2, 3),
        ],
    );
    let s = r.query("lin", &[&bad]).unwrap();
    assert!(s.closed && s.traces.is_empty());

    let illegal = queue::sequential_trace(
        "s",
        &[
            op(1, Op::Push, Some(1), 0, 1),
            op(2, Op::Pop, Some(2), 2, 3),
        ],
    );
    assert!(r.query("legal", &[&illegal]).unwrap().traces.is_empty());
    let empty = Trace::complete("e", []);
    assert_eq!(r.query("legal", &[&empty]).unwrap().traces.len(), 1);

    let overlapping = queue::history_trace(
        "m",
        &[
            op(1, Op::Push, Some(1), 0, 2),
            op(2, Op::Push, Some(2), 2, 3),
        ],
    );
    assert!(matches!(
        r.query("lin", &[&overlapping]),
        Err(GenError::Malformed(_))
    ));
}

#[test]
fn lin_waits_for_termination() {
    let mut r = GeneratorRegistry::new().with("lin", Lin);
    let mut h = Trace::new("h");
    h.push(op(1, Op::Push, Some(1), 0, 1).to_valuation())
        .unwrap();
    let s = r.query("lin", &[&h]).unwrap();
    assert!(!s.closed && s.traces.is_empty());
    h.terminate();
    let s = r.query("lin", &[&h]).unwrap();
    assert!(s.closed && s.traces.len() == 1);
    let again = r.query("lin", &[&h]).unwrap();
    assert_eq!(again.traces, s.traces);
    assert_eq!(r.stats().updates, 2);
}

#[test]
fn registry_errors() {
    let mut r = GeneratorRegistry::new().with("sub", Sub);
    assert!(matches!(
        r.query("nope", &[&letters(1)]),
        Err(GenError::Unavailable(_))
    ));
    assert!(matches!(r.query("sub", &[]), Err(GenError::Unavailable(_))));
}

#[test]
fn produced_traces_get_distinct_ids() {
    let mut r = GeneratorRegistry::new().with("sub", Sub);
    let s = r.query("sub", &[&letters(2)]).unwrap();
    let ids: alloc::collections::BTreeSet<_> = s.traces.iter().map(|t| t.id().clone()).collect();
    assert_eq!(ids.len(), 3);
    assert_eq!(&**s.traces[1].id(), "sub(t)#1");
}

#[test]
fn samples_share_inputs_and_replay() {
    let system = OdSystem::new(4, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut r = GeneratorRegistry::new()
        .with(
            "samples",
            Samples {
                n: 5,
                system,
                seed: 1,
            },
        )
        .with(
            "none",
            Samples {
                n: 0,
                system,
                seed: 1,
            },
        );
    let mut checked = 0;
    for k in 0..20 {
        let input = system.grid.random_input(&mut rng, 4);
        let target = system.random_target(&mut rng, &input);
        let t = Trace::complete(&alloc::format!("t{k}"), system.run(&input, target));
        assert!(r.query("none", &[&t]).unwrap().traces.is_empty());
        let s = r.query("samples", &[&t]).unwrap();
        assert!(s.closed);
        assert_eq!(s.traces.len(), 5);
        for sample in &s.traces {
            assert_eq!(robot::inputs_of(sample), Some(input.clone()));
            // Some secret target reproduces the sample.
            let cells = system.grid.cells(*input.last().unwrap());
            assert!(cells.iter().any(|&c| system.run(&input, c).as_slice()
                == sample.events().cloned().collect::<Vec<_>>().as_slice()));
            checked += 1;
        }
    }
    assert_eq!(checked, 100);
}

#[test]
fn samples_need_only_the_input_word() {
    let system = OdSystem::new(4, 0.5);
    let full = system.run(&[3, 7], (2, 6));
    let mut t = Trace::new("t");
    let mut r = GeneratorRegistry::new().with(
        "samples",
        Samples {
            n: 2,
            system,
            seed: 0,
        },
    );
    for (i, e) in full.into_iter().enumerate() {
        t.push(e).unwrap();
        let s = r.query("samples", &[&t]).unwrap();
        // Inputs occupy positions 0 and 1, the delimiter position 2.
        assert_eq!(s.closed, i >= 2, "after {} events", i + 1);
    }
}

#[test]
fn eqarea_modes() {
    let sys = OpacitySystem::opaque();
    let traces = robot::gen_opacity_traces(&sys, 5, 3, 10);
    let mut r = GeneratorRegistry::new()
        .with(
            "aat",
            EqArea {
                mode: EqAreaMode::AllAdmissible,
                system: sys.clone(),
                limit: 100_000,
            },
        )
        .with(
            "w",
            EqArea {
                mode: EqAreaMode::OneWitness,
                system: sys.clone(),
                limit: 100_000,
            },
        );
    for t in &traces {
        let all = r.query("aat", &[t]).unwrap();
        let w = r.query("w", &[t]).unwrap();
        assert_eq!(w.traces.len(), 1);
        assert!(w
            .traces
            .iter()
            .all(|x| all.traces.iter().any(|y| y.letters() == x.letters())));
        assert_ne!(robot::acts_of(&w.traces[0]), robot::acts_of(t));
        assert_eq!(robot::areas_of(&w.traces[0]), robot::areas_of(t));
    }
}

#[test]
fn one_witness_matches_exhaustive_search_on_a_small_grid() {
    let grid = Grid {
        width: 3,
        height: 3,
        block: 1,
    };
    for (initial, gate) in [
        (alloc::vec![(0, 1), (1, 0)], Some((0, 0))),
        (alloc::vec![(1, 1)], None),
        (alloc::vec![(0, 0), (2, 2)], None),
    ] {
        let sys = OpacitySystem {
            grid,
            initial,
            gate,
            deterministic: false,
            tail: 1,
        };
        for input in [alloc::vec![8], alloc::vec![2, 6], alloc::vec![4, 0]] {
            let runs = sys.runs(&input, usize::MAX);
            assert!(!runs.is_empty());
            let mut by_areas: BTreeMap<Vec<i64>, Vec<Vec<Value>>> = BTreeMap::new();
            for evs in &runs {
                let t = Trace::complete("r", evs.clone());
                by_areas
                    .entry(robot::areas_of(&t))
                    .or_default()
                    .push(robot::acts_of(&t));
            }
            for evs in &runs {
                let t = Trace::complete("r", evs.clone());
                let twins = &by_areas[&robot::areas_of(&t)];
                let expect = twins.iter().any(|a| *a != robot::acts_of(&t));
                assert_eq!(sys.eqarea_witness(&t, usize::MAX).is_some(), expect);
                assert_eq!(sys.eqarea_all(&t, usize::MAX).len(), twins.len());
            }
        }
    }
}

#[test]
fn builtins_by_name() {
    for name in BUILTINS {
        let opts = if *name == "ext" {
            Options::parse("values=1|2|empty").unwrap()
        } else {
            Options::default()
        };
        assert!(builtin(name, &opts).is_ok(), "{name}");
    }
    assert!(builtin("ext", &Options::default()).is_err());
    assert!(builtin("samples", &Options::parse("n=x").unwrap()).is_err());
    assert!(builtin("samples", &Options::parse("bogus=1").unwrap()).is_err());
    assert!(builtin("nope", &Options::default()).is_err());
    assert!(Options::parse("n").is_err());
    assert_eq!(
        builtin("samples", &Options::parse("n=3").unwrap())
            .unwrap()
            .arity(),
        Some(1)
    );
}
