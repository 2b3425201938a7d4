//! Data domains of the bundled scenarios.

use alloc::format;

use crate::trace::{DataDomain, Value};

fn field<'a>(v: &'a Value, name: &str) -> Option<&'a Value> {
    v.as_event()?.get(name)
}

/// Security-labelled events: `label` and public output `pub`.
pub fn security() -> DataDomain {
    DataDomain::new("security", &["label", "pub"])
}

/// Public input `in_l`, secret input `in_h`, public output `out_l`.
pub fn od_example() -> DataDomain {
    DataDomain::new("od-example", &["in_l", "in_h", "out_l"])
}

/// Robot runs: the public `input` (areas, then a delimiter and padding),
/// the observable `area` and the hidden action `act`.
pub fn robot() -> DataDomain {
    DataDomain::new("robot", &["input", "area", "act"])
}

/// Event-based concurrent histories with `procs` processes numbered from 1.
///
/// Besides the variables `tp` (`"inv"` or `"res"`), `proc`, `op` and
/// `param`, it defines `ev` (the whole event), `inv`/`res` (the
/// `(proc, op, param)` triple of invocations/responses) and `proc_<p>`
/// (events of process `p`).
pub fn history(procs: i64) -> DataDomain {
    let triple = |v: &Value| {
        Some(Value::tuple(alloc::vec![
            field(v, "proc")?.clone(),
            field(v, "op")?.clone(),
            field(v, "param")?.clone(),
        ]))
    };
    let mut d = DataDomain::new("history", &["tp", "proc", "op", "param"])
        .with_projection("ev", |v| Some(v.clone()))
        .with_projection("inv", move |v| {
            (field(v, "tp")?.as_sym()? == "inv")
                .then(|| triple(v))
                .flatten()
        })
        .with_projection("res", move |v| {
            (field(v, "tp")?.as_sym()? == "res")
                .then(|| triple(v))
                .flatten()
        });
    for p in 1..=procs {
        d = d.with_projection(&format!("proc_{p}"), move |v| {
            (field(v, "proc")?.as_int()? == p).then(|| v.clone())
        });
    }
    d
}

/// Operation-based queue histories (one event per completed operation,
/// with `invoke` and `response` times) and their linearizations (which
/// carry the queue `size` after each operation).
pub fn queue_ops() -> DataDomain {
    DataDomain::new(
        "queue",
        &["proc", "op", "param", "invoke", "response", "size"],
    )
    .with_projection("ev", |v| Some(v.clone()))
    .with_projection("abstract", |v| {
        Some(Value::tuple(alloc::vec![
            field(v, "op")?.clone(),
            field(v, "param")?.clone()
        ]))
    })
}

/// Picks a domain by name (`robot`, `queue`, `history`, `security`).
pub fn by_name(name: &str) -> Option<DataDomain> {
    Some(match name {
        "robot" => robot(),
        "queue" => queue_ops(),
        "history" => history(2),
        "security" => security(),
        _ => return None,
    })
}
