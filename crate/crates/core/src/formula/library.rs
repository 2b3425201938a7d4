//! Named formulas for the bundled scenarios, in concrete syntax.

use crate::scenarios::domains;
use crate::trace::DataDomain;

/// Two runs with the same public input must have stutter-equivalent public
/// outputs; written against the three-variable example domain.
pub const OD_EXAMPLE: &str =
    "forall p . forall q . in_l(p)[0] = in_l(q)[0] -> out_l(p) ~<= out_l(q)";

/// Initial-state opacity over observed traces only.
pub const OPACITY_PASSIVE: &str =
    "forall p . exists q . label(q)[0] = \"public\" & pub(p) = pub(q)";

/// Initial-state opacity with the witness drawn from a reference model of
/// runs starting in public states.
pub const OPACITY_INIT_PUB: &str =
    "forall p . exists q in initPub(p) . label(q)[0] = \"public\" & pub(p) = pub(q)";

/// Observational determinism up to stuttering.
pub const OD_STUTTER: &str = "forall p . forall q . pub(p)[0] = pub(q)[0] -> pub(p) ~<= pub(q)";

/// Observational determinism with a testing generator.
pub const OD_TEST: &str =
    "forall p . forall q in test(p) . pub(p)[0] = pub(q)[0] -> pub(p) ~<= pub(q)";

/// Linearizability of an event-based queue history against a sequential
/// specification `seq`, with extensions (`ext`) and prefixes (`sub`).
pub const LINEARIZABILITY: &str = r#"
forall h . exists s in seq(h) .
  (tp(s) <= ("inv" ; "res")* & res(s) <= inv(s))
  & (exists e in ext(h) .
       ev(h) <= ev(e) & tp(e) <= tp(h) ; "res"*
       & proc_1(e) = proc_1(s) & proc_2(e) = proc_2(s))
  & (forall hi in sub(h) .
       (ev(hi) <= ev(h) & tp(hi)[-1] = "inv") ->
       exists si in sub(s) .
         ev(si) <= ev(s) & inv(hi)[-1] = inv(si)[-1]
         & (forall hr in sub(hi) .
              res(hr) <= res(hi) ->
              exists sr in sub(si) . res(sr) <= res(si) & res(hr)[-1] = res(sr)[-1]))
"#;

/// The same requirement with the sequential witness drawn from observations.
pub const LINEARIZABILITY_PASSIVE: &str = r#"
forall h . exists s .
  (tp(s) <= ("inv" ; "res")* & res(s) <= inv(s))
  & (exists e in ext(h) .
       ev(h) <= ev(e) & tp(e) <= tp(h) ; "res"*
       & proc_1(e) = proc_1(s) & proc_2(e) = proc_2(s))
"#;

/// Operation-based histories: a linear order of the operations whose
/// abstract view matches a legal sequential history.
pub const LINEARIZABILITY_OPS: &str =
    "forall p . exists l in linear(p) . exists s in seq(p) . abstract(l) = ev(s)";

/// Robot scenario: same input prefix implies the same area sequence.
pub const OD_ROBOT: &str = "forall p . forall q . input(p) <= input(q) -> area(p) = area(q)";

/// Robot scenario with sampled runs for the same inputs.
pub const OD_ROBOT_SAMPLES: &str = "forall p . forall q in samples(p) . area(p) = area(q)";

/// Robot scenario: some other run looks the same but acts differently.
pub const OPACITY_ROBOT: &str = "forall p . exists q . area(p) = area(q) & act(p) != act(q)";

/// Opacity with the witness drawn from runs with the same area sequence.
pub const OPACITY_ROBOT_EQAREA: &str =
    "forall p . exists q in eqarea(p) . area(p) = area(q) & act(p) != act(q)";

/// Every history has a linearization.
pub const LIN: &str = "forall p . exists l in lin(p) . true";

/// Every history has a linearization that replays on a reference queue.
pub const LIN_LEGAL: &str = "forall p . exists l in lin(p) . exists c in legal(l) . true";

/// Every history has a linearization in which the queue never holds more
/// than two elements.
pub const LIN_BOUNDED: &str = "forall p . exists l in lin(p) . size(l) <= (0 + 1 + 2)*";

pub const ALL: &[(&str, &str)] = &[
    ("od-example", OD_EXAMPLE),
    ("opacity-passive", OPACITY_PASSIVE),
    ("opacity-init-pub", OPACITY_INIT_PUB),
    ("od-stutter", OD_STUTTER),
    ("od-test", OD_TEST),
    ("linearizability", LINEARIZABILITY),
    ("linearizability-passive", LINEARIZABILITY_PASSIVE),
    ("linearizability-ops", LINEARIZABILITY_OPS),
    ("od-robot", OD_ROBOT),
    ("od-robot-samples", OD_ROBOT_SAMPLES),
    ("opacity-robot", OPACITY_ROBOT),
    ("opacity-robot-eqarea", OPACITY_ROBOT_EQAREA),
    ("lin", LIN),
    ("lin-legal", LIN_LEGAL),
    ("lin-bounded", LIN_BOUNDED),
];

/// The data domain each named formula is written against.
pub fn domain_of(name: &str) -> Option<DataDomain> {
    Some(match name {
        "od-example" => domains::od_example(),
        "opacity-passive" | "opacity-init-pub" | "od-stutter" | "od-test" => domains::security(),
        "linearizability" | "linearizability-passive" => domains::history(2),
        "linearizability-ops" | "lin" | "lin-legal" | "lin-bounded" => domains::queue_ops(),
        "od-robot" | "od-robot-samples" | "opacity-robot" | "opacity-robot-eqarea" => {
            domains::robot()
        }
        _ => return None,
    })
}

/// Looks a formula up by name.
pub fn get(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula_in;

    #[test]
    fn fixtures_type_check_against_their_domains() {
        for (name, src) in ALL {
            let domain = domain_of(name).unwrap();
            let f = parse_formula_in(src, &domain).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(f.is_closed(), "{name}");
        }
    }
}
