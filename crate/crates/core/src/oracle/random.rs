//! Random small instances: traces over a tiny alphabet, simple trace
//! formulas, monitorable formulas and total generator interpretations.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GeneratorInterp;
use crate::formula::{Formula, TraceFormula};
use crate::trace::{DataDomain, Trace, Valuation, Value};

pub const ALPHABET: [&str; 3] = ["a", "b", "c"];

/// Events carry one field `x`. Besides `x` there is `ab`, which keeps `a`
/// and `b` and drops every other letter, and `ev`, the whole event.
pub fn letters_domain() -> DataDomain {
    DataDomain::new("letters", &["x"])
        .with_projection("ab", |v| {
            let x = v.as_event()?.get("x")?;
            matches!(x.as_sym(), Some("a" | "b")).then(|| x.clone())
        })
        .with_projection("ev", |v| Some(v.clone()))
}

pub fn letter(c: &str) -> Valuation {
    Valuation::from_pairs([("x", Value::sym(c))])
}

/// A terminated trace spelling `word` letter by letter.
pub fn word_trace(id: &str, word: &str) -> Trace {
    let letters: Vec<String> = word.chars().map(|c| c.into()).collect();
    Trace::complete(id, letters.iter().map(|c| letter(c)))
}

pub fn random_trace(rng: &mut impl Rng, id: &str, max_len: usize, alphabet: usize) -> Trace {
    let n = rng.gen_range(0..=max_len);
    Trace::complete(
        id,
        (0..n).map(|_| letter(ALPHABET[rng.gen_range(0..alphabet)])),
    )
}

fn random_const(rng: &mut impl Rng, alphabet: usize) -> TraceFormula {
    TraceFormula::constant(Value::sym(ALPHABET[rng.gen_range(0..alphabet)]))
}

/// A random simple trace formula mentioning at most the variable `var`.
/// With `one_pass`, the variable is never read twice in sequence, so the
/// formula compiles to a single transducer.
pub fn random_trace_formula(
    rng: &mut impl Rng,
    var: Option<&str>,
    depth: usize,
    alphabet: usize,
    one_pass: bool,
) -> TraceFormula {
    let leaf = |rng: &mut ChaCha8Rng| -> TraceFormula {
        match (var, rng.gen_range(0..5)) {
            (Some(v), 0..=1) => TraceFormula::proj("x", v),
            (Some(v), 2) => TraceFormula::proj("ab", v),
            (_, 3) => TraceFormula::Epsilon,
            _ => random_const(rng, alphabet),
        }
    };
    let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
    if depth == 0 || local.gen_bool(0.3) {
        return leaf(&mut local);
    }
    match local.gen_range(0..6) {
        0 | 1 => {
            let (va, vb) = match (var, one_pass, local.gen_bool(0.5)) {
                (None, ..) => (None, None),
                (Some(v), false, _) => (Some(v), Some(v)),
                (Some(v), true, true) => (Some(v), None),
                (Some(v), true, false) => (None, Some(v)),
            };
            TraceFormula::concat(
                random_trace_formula(&mut local, va, depth - 1, alphabet, one_pass),
                random_trace_formula(&mut local, vb, depth - 1, alphabet, one_pass),
            )
        }
        2 => TraceFormula::union(
            random_trace_formula(&mut local, var, depth - 1, alphabet, one_pass),
            random_trace_formula(&mut local, var, depth - 1, alphabet, one_pass),
        ),
        3 => TraceFormula::star(random_trace_formula(
            &mut local,
            None,
            depth - 1,
            alphabet,
            one_pass,
        )),
        4 => TraceFormula::slice(
            random_trace_formula(&mut local, var, depth - 1, alphabet, one_pass),
            local.gen_range(-3..=3),
            local.gen_range(-3..=3),
        ),
        _ => TraceFormula::stutter(random_trace_formula(
            &mut local,
            var,
            depth - 1,
            alphabet,
            one_pass,
        )),
    }
}

/// A side that reads `var`: the variable appears at least once.
pub fn random_reading_side(
    rng: &mut impl Rng,
    var: &str,
    depth: usize,
    alphabet: usize,
    one_pass: bool,
) -> TraceFormula {
    loop {
        let tf = random_trace_formula(rng, Some(var), depth, alphabet, one_pass);
        if !tf.vars().is_empty() {
            return tf;
        }
    }
}

fn random_side(rng: &mut impl Rng, vars: &[Arc<str>], alphabet: usize) -> TraceFormula {
    if rng.gen_bool(0.85) {
        let v = vars.choose(rng).expect("at least one variable");
        let one_pass = rng.gen_bool(0.8);
        random_reading_side(rng, v, 2, alphabet, one_pass)
    } else {
        random_trace_formula(rng, None, 2, alphabet, true)
    }
}

/// A random boolean combination of `atoms` atoms over `vars`.
pub fn random_body(
    rng: &mut impl Rng,
    vars: &[Arc<str>],
    atoms: usize,
    alphabet: usize,
) -> Formula {
    let mut parts: Vec<Formula> = (0..atoms.max(1))
        .map(|_| {
            let a = Formula::leq(
                random_side(rng, vars, alphabet),
                random_side(rng, vars, alphabet),
            );
            if rng.gen_bool(0.3) {
                Formula::not(a)
            } else {
                a
            }
        })
        .collect();
    while parts.len() > 1 {
        let b = parts.pop().unwrap();
        let a = parts.pop().unwrap();
        let c = match rng.gen_range(0..3) {
            0 => Formula::and(a, b),
            1 => Formula::or(a, b),
            _ => Formula::implies(a, b),
        };
        parts.push(if rng.gen_bool(0.2) {
            Formula::not(c)
        } else {
            c
        });
    }
    parts.pop().unwrap()
}

/// Names of the generators random formulas may use, with their arities.
pub const GENERATORS: [(&str, usize); 3] = [("g", 1), ("h", 1), ("k", 0)];

/// A closed formula with at most `max_blocks` quantifier blocks in the
/// monitorable fragment: quantifiers over observed traces come first and
/// share a polarity; the others draw from generators whose arguments are
/// bound earlier.
pub fn random_formula(rng: &mut impl Rng, max_blocks: usize, alphabet: usize) -> Formula {
    enum Q {
        Passive(bool, Arc<str>),
        Active(bool, Arc<str>, &'static str, Vec<Arc<str>>),
    }
    let blocks = rng.gen_range(1..=max_blocks.max(1));
    let mut qs: Vec<Q> = Vec::new();
    let mut vars: Vec<Arc<str>> = Vec::new();
    let mut fresh = {
        let mut n = 0;
        move || {
            n += 1;
            Arc::<str>::from(format!("v{n}"))
        }
    };
    let first_passive = rng.gen_bool(0.8);
    let passive_pol = rng.gen_bool(0.5);
    let mut prev_pol: Option<bool> = None;
    for b in 0..blocks {
        let passive = b == 0 && first_passive;
        // Consecutive blocks have different polarities or sources.
        let pol = if passive {
            passive_pol
        } else {
            match prev_pol {
                Some(p) if !(b == 1 && first_passive) => !p,
                _ => rng.gen_bool(0.5),
            }
        };
        prev_pol = Some(pol);
        let width = rng.gen_range(1..=2);
        let (gen, arity) = *GENERATORS.choose(rng).unwrap();
        for _ in 0..width {
            let v = fresh();
            if passive {
                qs.push(Q::Passive(pol, v.clone()));
            } else {
                let args: Vec<Arc<str>> = if arity == 0 || vars.is_empty() {
                    Vec::new()
                } else {
                    alloc::vec![vars.choose(rng).unwrap().clone()]
                };
                let (gen, args) = if arity == 1 && args.is_empty() {
                    ("k", Vec::new())
                } else {
                    (gen, args)
                };
                qs.push(Q::Active(pol, v.clone(), gen, args));
            }
            vars.push(v);
        }
    }
    let atoms = rng.gen_range(1..=3);
    let mut f = random_body(rng, &vars, atoms, alphabet);
    for q in qs.into_iter().rev() {
        f = match q {
            Q::Passive(true, v) => Formula::forall(&v, f),
            Q::Passive(false, v) => Formula::exists(&v, f),
            Q::Active(pol, v, g, args) => {
                let args: Vec<&str> = args.iter().map(|a| &**a).collect();
                if pol {
                    Formula::forall_in(&v, g, &args, f)
                } else {
                    Formula::exists_in(&v, g, &args, f)
                }
            }
        };
    }
    f
}

fn content_hash(seed: u64, args: &[&Trace]) -> u64 {
    let words: Vec<&[Value]> = args.iter().map(|t| t.letters()).collect();
    crate::hash::hash_of(seed, &words)
}

/// A total interpretation of [`GENERATORS`]: each maps its argument words
/// to between zero and two random traces, deterministically in the
/// content of the arguments.
pub fn random_interp(seed: u64, max_len: usize, alphabet: usize) -> GeneratorInterp {
    let mut sigma = GeneratorInterp::new();
    for (k, (name, _)) in GENERATORS.iter().enumerate() {
        let salt = seed.wrapping_mul(31).wrapping_add(k as u64);
        let name_owned: String = (*name).into();
        sigma.insert(
            name,
            Arc::new(move |args: &[&Trace]| {
                let mut rng = ChaCha8Rng::seed_from_u64(content_hash(salt, args));
                let n = rng.gen_range(0..=2);
                (0..n)
                    .map(|i| {
                        random_trace(&mut rng, &format!("{name_owned}#{i}"), max_len, alphabet)
                    })
                    .collect()
            }),
        );
    }
    sigma
}

/// One randomized monitoring instance.
pub struct Instance {
    pub formula: Formula,
    pub traces: Vec<Trace>,
    pub sigma: GeneratorInterp,
}

/// Alphabet of at most three letters, at most three terminated traces of
/// length at most five, at most two quantifier blocks.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = rng.gen_range(2..=3);
    let n = rng.gen_range(0..=3);
    let traces = (0..n)
        .map(|i| random_trace(&mut rng, &format!("t{i}"), 5, alphabet))
        .collect();
    Instance {
        formula: random_formula(&mut rng, 2, alphabet),
        traces,
        sigma: random_interp(seed, 3, alphabet),
    }
}
