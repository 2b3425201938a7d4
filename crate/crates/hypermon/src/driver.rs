//! Running a monitor over a trace file or live streams, under a wall-clock
//! timeout.

use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::PathBuf;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::{Duration, Instant};

use hypermon_core::monitor::MonitorStats;
use hypermon_core::{Monitor, Observation, Verdict};
use serde_json::{json, Value as Json};

use crate::cputime::thread_cpu_time;
use crate::error::{Error, Result};
use crate::io::{self as jsonl, Record};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Satisfied,
    Violated,
    Unknown,
    GaveUp,
    Timeout,
}

impl Outcome {
    pub fn of(v: Verdict) -> Self {
        match v {
            Verdict::True => Outcome::Satisfied,
            Verdict::False => Outcome::Violated,
            Verdict::Unknown => Outcome::Unknown,
            Verdict::GaveUp => Outcome::GaveUp,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Satisfied => "SATISFIED",
            Outcome::Violated => "VIOLATED",
            Outcome::Unknown => "UNKNOWN",
            Outcome::GaveUp => "UNKNOWN-GAVE-UP",
            Outcome::Timeout => "TIMEOUT",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Satisfied => 0,
            Outcome::Violated => 1,
            _ => 2,
        }
    }
}

/// Where the traces come from.
#[derive(Clone, Debug)]
pub enum Input {
    /// A file or a directory of `.jsonl` files, read completely; the
    /// observation is closed afterwards.
    Batch(PathBuf),
    /// Files (`-` for standard input) read concurrently. The observation
    /// is closed once every source has sent a `close` record. With
    /// `follow`, a source at end of file is polled for more lines until it
    /// sends `close`.
    Stream { sources: Vec<String>, follow: bool },
}

#[derive(Clone, Debug)]
pub struct Report {
    pub outcome: Outcome,
    pub witness: Option<Vec<(String, String)>>,
    pub traces: usize,
    pub events: usize,
    pub closed: bool,
    pub wall: Duration,
    /// CPU time of the monitoring thread.
    pub cpu: Duration,
    pub stats: Option<MonitorStats>,
}

impl Report {
    pub fn to_json(&self) -> Json {
        let mut j = json!({
            "verdict": self.outcome.label(),
            "witness": self.witness.as_ref().map(|w| {
                w.iter().map(|(v, t)| json!({"var": v, "trace": t})).collect::<Vec<_>>()
            }),
            "traces": self.traces,
            "events": self.events,
            "closed": self.closed,
            "wall_ms": self.wall.as_secs_f64() * 1e3,
            "cpu_ms": self.cpu.as_secs_f64() * 1e3,
        });
        if let Some(s) = &self.stats {
            j["stats"] = json!({
                "steps": s.steps,
                "nodes": s.nodes,
                "nodes_alive": s.nodes_alive,
                "tuples": s.tuples,
                "tuples_peak": s.tuples_peak,
                "traces": s.traces,
                "atoms_started": s.atoms_started,
                "atom_steps": s.atom_steps,
                "configurations": s.configurations,
                "generator_queries": s.generator_queries,
            });
        }
        j
    }

    /// The human-readable summary printed before the JSON line.
    pub fn summary(&self, with_stats: bool) -> String {
        let mut out = format!("verdict: {}\n", self.outcome.label());
        if let Some(w) = &self.witness {
            let items: Vec<String> = w.iter().map(|(v, t)| format!("{v} = {t}")).collect();
            out += &format!("witness: {}\n", items.join(", "));
        }
        out += &format!(
            "observation: {} traces, {} events{}\n",
            self.traces,
            self.events,
            if self.closed { ", closed" } else { "" }
        );
        out += &format!(
            "time: {:.1} ms wall, {:.1} ms cpu\n",
            self.wall.as_secs_f64() * 1e3,
            self.cpu.as_secs_f64() * 1e3
        );
        if let (true, Some(s)) = (with_stats, &self.stats) {
            out += &format!(
                "monitor: {} steps, {} nodes ({} alive), {} tuples (peak {}), {} traces taken\n",
                s.steps, s.nodes, s.nodes_alive, s.tuples, s.tuples_peak, s.traces
            );
            out += &format!(
                "atoms: {} started, {} steps, {} configurations; {} generator queries\n",
                s.atoms_started, s.atom_steps, s.configurations, s.generator_queries
            );
        }
        out
    }
}

struct Finished {
    verdict: Verdict,
    witness: Option<Vec<(String, String)>>,
    traces: usize,
    events: usize,
    closed: bool,
    cpu: Duration,
    stats: MonitorStats,
}

fn finish(m: &Monitor, obs: &Observation, verdict: Verdict, cpu: Duration) -> Finished {
    let witness = if verdict.is_conclusive() {
        m.witness(obs).map(|w| {
            w.into_iter()
                .map(|(v, t)| (v.to_string(), t.to_string()))
                .collect()
        })
    } else {
        None
    };
    Finished {
        verdict,
        witness,
        traces: obs.len(),
        events: obs.traces().iter().map(|t| t.len()).sum(),
        closed: obs.is_closed(),
        cpu,
        stats: m.stats().clone(),
    }
}

/// Runs `monitor` over `input`, giving up after `timeout` of wall time.
pub fn run(monitor: Monitor, input: &Input, timeout: Duration) -> Result<Report> {
    let start = Instant::now();
    let (tx, rx) = mpsc::channel::<Result<Finished>>();
    match input {
        Input::Batch(path) => {
            let obs = jsonl::read_observation(path)?;
            spawn_worker(tx, move || batch(monitor, obs))?;
        }
        Input::Stream { sources, follow } => {
            let records = spawn_readers(sources, *follow)?;
            let n = sources.len();
            spawn_worker(tx, move || stream(monitor, records, n))?;
        }
    }
    let outcome = rx.recv_timeout(timeout);
    let wall = start.elapsed();
    match outcome {
        Ok(result) => {
            let f = result?;
            Ok(Report {
                outcome: Outcome::of(f.verdict),
                witness: f.witness,
                traces: f.traces,
                events: f.events,
                closed: f.closed,
                wall,
                cpu: f.cpu,
                stats: Some(f.stats),
            })
        }
        Err(RecvTimeoutError::Timeout) => Ok(Report {
            outcome: Outcome::Timeout,
            witness: None,
            traces: 0,
            events: 0,
            closed: false,
            wall,
            cpu: Duration::ZERO,
            stats: None,
        }),
        Err(RecvTimeoutError::Disconnected) => {
            Err(Error::Internal("the monitoring thread panicked".into()))
        }
    }
}

fn spawn_worker(
    tx: Sender<Result<Finished>>,
    job: impl FnOnce() -> Result<Finished> + Send + 'static,
) -> Result<()> {
    thread::Builder::new()
        .name("monitor".into())
        .spawn(move || {
            let _ = tx.send(job());
        })
        .map(|_| ())
        .map_err(|error| Error::Io {
            path: "<thread>".into(),
            error,
        })
}

fn batch(mut m: Monitor, obs: Observation) -> Result<Finished> {
    let cpu0 = thread_cpu_time();
    let v = m.run(&obs)?;
    let cpu = thread_cpu_time().saturating_sub(cpu0);
    Ok(finish(&m, &obs, v, cpu))
}

enum Msg {
    Record(usize, Record),
    /// A source ended without `close`.
    Eof,
    Failed(Error),
}

fn spawn_readers(sources: &[String], follow: bool) -> Result<Receiver<Msg>> {
    let (tx, rx) = mpsc::channel();
    for (k, src) in sources.iter().enumerate() {
        let reader: Box<dyn BufRead + Send> = if src == "-" {
            Box::new(BufReader::new(io::stdin()))
        } else {
            let f = File::open(src).map_err(|error| Error::Io {
                path: src.into(),
                error,
            })?;
            Box::new(BufReader::new(f))
        };
        let tx = tx.clone();
        let path = PathBuf::from(src);
        let follow = follow && src != "-";
        thread::Builder::new()
            .name(format!("reader-{k}"))
            .spawn(move || read_source(k, path, reader, follow, tx))
            .map_err(|error| Error::Io {
                path: src.into(),
                error,
            })?;
    }
    Ok(rx)
}

fn read_source(
    k: usize,
    path: PathBuf,
    mut reader: Box<dyn BufRead + Send>,
    follow: bool,
    tx: Sender<Msg>,
) {
    let mut line = String::new();
    let mut number = 0;
    loop {
        // A line without its newline is kept until the rest arrives.
        match reader.read_line(&mut line) {
            Ok(0) if follow => {
                thread::sleep(Duration::from_millis(20));
                continue;
            }
            Ok(0) => {
                let _ = tx.send(Msg::Eof);
                return;
            }
            Ok(_) if follow && !line.ends_with('\n') => continue,
            Ok(_) => {}
            Err(error) => {
                let _ = tx.send(Msg::Failed(Error::Io { path, error }));
                return;
            }
        }
        number += 1;
        match jsonl::parse_record(&line) {
            Ok(None) => {}
            Ok(Some(r)) => {
                let close = r == Record::Close;
                if tx.send(Msg::Record(k, r)).is_err() || close {
                    return;
                }
            }
            Err(message) => {
                let _ = tx.send(Msg::Failed(Error::Format {
                    path,
                    line: number,
                    message,
                }));
                return;
            }
        }
        line.clear();
    }
}

fn stream(mut m: Monitor, rx: Receiver<Msg>, sources: usize) -> Result<Finished> {
    let mut obs = Observation::new();
    let mut cpu = Duration::ZERO;
    let mut closed = vec![false; sources];
    let mut live = sources;
    let mut verdict = Verdict::Unknown;
    while live > 0 {
        let Ok(first) = rx.recv() else { break };
        let cpu0 = thread_cpu_time();
        let mut next = Some(first);
        while let Some(msg) = next {
            match msg {
                Msg::Record(k, Record::Close) => {
                    closed[k] = true;
                    live -= 1;
                }
                Msg::Record(_, r) => jsonl::apply(&mut obs, r).map_err(|error| Error::Update {
                    path: "<stream>".into(),
                    line: 0,
                    error,
                })?,
                Msg::Eof => live -= 1,
                Msg::Failed(e) => return Err(e),
            }
            next = rx.try_recv().ok();
        }
        if closed.iter().all(|&c| c) {
            obs.close();
        }
        verdict = m.run(&obs)?;
        cpu += thread_cpu_time().saturating_sub(cpu0);
        if verdict != Verdict::Unknown {
            log::info!("verdict {verdict} after {} traces", obs.len());
            break;
        }
    }
    Ok(finish(&m, &obs, verdict, cpu))
}
