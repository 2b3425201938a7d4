//! The JSON-lines trace format.
//!
//! One record per line:
//!
//! ```text
//! {"trace":"t0","event":{"x":"a","n":3}}
//! {"trace":"t0","end":true}
//! {"close":true}
//! ```
//!
//! An event for an unknown trace starts that trace; `end` terminates it;
//! `close` declares that no further traces follow. Event values are
//! integers, strings, arrays (tuples) or objects (nested events). Blank
//! lines are ignored.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use hypermon_core::trace::{Delta, TraceId};
use hypermon_core::{Observation, Trace, Valuation, Value};
use serde_json::{json, Map, Value as Json};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Record {
    Event(TraceId, Valuation),
    End(TraceId),
    Close,
}

pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Int(n) => json!(n),
        Value::Sym(s) => json!(&**s),
        Value::Tuple(items) => Json::Array(items.iter().map(value_to_json).collect()),
        Value::Event(e) => Json::Object(event_to_json(e)),
    }
}

fn event_to_json(e: &Valuation) -> Map<String, Json> {
    e.iter()
        .map(|(k, v)| (k.to_string(), value_to_json(v)))
        .collect()
}

pub fn json_to_value(j: &Json) -> std::result::Result<Value, String> {
    Ok(match j {
        Json::Number(n) => Value::Int(
            n.as_i64()
                .ok_or_else(|| format!("`{n}` is not a 64-bit integer"))?,
        ),
        Json::String(s) => Value::sym(s),
        Json::Array(items) => Value::tuple(
            items
                .iter()
                .map(json_to_value)
                .collect::<std::result::Result<_, _>>()?,
        ),
        Json::Object(m) => Value::Event(json_to_event(m)?),
        Json::Bool(b) => Value::sym(if *b { "true" } else { "false" }),
        Json::Null => return Err("null is not a value".into()),
    })
}

fn json_to_event(m: &Map<String, Json>) -> std::result::Result<Valuation, String> {
    let pairs = m
        .iter()
        .map(|(k, v)| Ok((k.as_str(), json_to_value(v)?)))
        .collect::<std::result::Result<Vec<_>, String>>()?;
    Ok(Valuation::from_pairs(pairs))
}

/// Parses one line; `None` for blank lines.
pub fn parse_record(line: &str) -> std::result::Result<Option<Record>, String> {
    let line = line.trim();
    if line.is_empty() {
        return Ok(None);
    }
    let j: Json = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let obj = j.as_object().ok_or("a record is a JSON object")?;
    if obj.get("close") == Some(&Json::Bool(true)) && obj.len() == 1 {
        return Ok(Some(Record::Close));
    }
    let id = obj
        .get("trace")
        .and_then(Json::as_str)
        .ok_or("missing string field `trace`")?;
    let id = TraceId::from(id);
    match (obj.get("event"), obj.get("end")) {
        (Some(Json::Object(ev)), None) if obj.len() == 2 => {
            Ok(Some(Record::Event(id, json_to_event(ev)?)))
        }
        (None, Some(Json::Bool(true))) if obj.len() == 2 => Ok(Some(Record::End(id))),
        _ => Err("expected `event` (an object) or `end: true` next to `trace`".into()),
    }
}

pub fn record_to_line(r: &Record) -> String {
    let j = match r {
        Record::Event(id, ev) => json!({"trace": &**id, "event": Json::Object(event_to_json(ev))}),
        Record::End(id) => json!({"trace": &**id, "end": true}),
        Record::Close => json!({"close": true}),
    };
    j.to_string()
}

/// Records that rebuild `trace`.
pub fn trace_records(trace: &Trace) -> Vec<Record> {
    let mut out: Vec<Record> = trace
        .events()
        .map(|e| Record::Event(trace.id().clone(), e.clone()))
        .collect();
    if trace.is_terminated() {
        out.push(Record::End(trace.id().clone()));
    }
    out
}

/// Writes the traces one after another, then the closing record if
/// `close` is set.
pub fn write_traces(w: &mut impl Write, traces: &[Trace], close: bool) -> std::io::Result<()> {
    for t in traces {
        if t.is_empty() && !t.is_terminated() {
            continue;
        }
        for r in trace_records(t) {
            writeln!(w, "{}", record_to_line(&r))?;
        }
    }
    if close {
        writeln!(w, "{}", record_to_line(&Record::Close))?;
    }
    Ok(())
}

/// Applies a record, starting the trace on its first event.
pub fn apply(
    obs: &mut Observation,
    r: Record,
) -> std::result::Result<(), hypermon_core::trace::UpdateError> {
    match r {
        Record::Event(id, ev) => {
            if obs.get(&id).is_none() {
                obs.apply(Delta::AddTrace(id.clone()))?;
            }
            obs.apply(Delta::Append(id, ev))?;
        }
        Record::End(id) => {
            if obs.get(&id).is_none() {
                obs.apply(Delta::AddTrace(id.clone()))?;
            }
            obs.apply(Delta::Terminate(id))?;
        }
        Record::Close => {
            obs.close();
        }
    }
    Ok(())
}

/// The `.jsonl` files of a directory in name order, or the path itself.
pub fn trace_files(path: &Path) -> Result<Vec<PathBuf>> {
    let io = |error| Error::Io {
        path: path.to_path_buf(),
        error,
    };
    if !path.is_dir() {
        fs::metadata(path).map_err(io)?;
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

/// Reads every record of a file into `obs`, ignoring `close` records.
pub fn read_file(path: &Path, obs: &mut Observation) -> Result<()> {
    let file = fs::File::open(path).map_err(|error| Error::Io {
        path: path.to_path_buf(),
        error,
    })?;
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|error| Error::Io {
            path: path.to_path_buf(),
            error,
        })?;
        let record = parse_record(&line).map_err(|message| Error::Format {
            path: path.to_path_buf(),
            line: n + 1,
            message,
        })?;
        match record {
            None | Some(Record::Close) => {}
            Some(r) => apply(obs, r).map_err(|error| Error::Update {
                path: path.to_path_buf(),
                line: n + 1,
                error,
            })?,
        }
    }
    Ok(())
}

/// The closed observation of a file or of all `.jsonl` files in a
/// directory.
pub fn read_observation(path: &Path) -> Result<Observation> {
    let mut obs = Observation::new();
    for f in trace_files(path)? {
        read_file(&f, &mut obs)?;
    }
    obs.close();
    Ok(obs)
}
