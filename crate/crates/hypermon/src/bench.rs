//! Scenario experiments: how many traces a monitor needs to find a
//! violation and how much CPU time it spends.

use std::sync::Arc;
use std::time::{Duration, Instant};

use hypermon_core::formula::{library, parse_formula_in};
use hypermon_core::generators::{builtin, GeneratorRegistry, Options};
use hypermon_core::scenarios::queue::{gen_queue_histories, QueueMode, QueueWorkload};
use hypermon_core::scenarios::robot::{
    gen_od_traces, gen_opacity_traces, OdWorkload, OpacitySystem,
};
use hypermon_core::{DataDomain, Monitor, MonitorConfig, Observation, Trace, Verdict};

use crate::cputime::thread_cpu_time;
use crate::error::{Error, Result};

/// A monitor for a library formula with its generators bound as given.
pub fn library_monitor(
    name: &str,
    generators: &[(&str, &str, Options)],
    give_up: usize,
) -> Result<Monitor> {
    let src =
        library::get(name).ok_or_else(|| Error::Usage(format!("no library formula `{name}`")))?;
    let domain =
        library::domain_of(name).unwrap_or_else(|| DataDomain::new("generic", &[] as &[&str]));
    let f = parse_formula_in(src, &domain).map_err(|error| Error::Parse {
        what: name.into(),
        error,
    })?;
    let mut reg = GeneratorRegistry::new();
    for (bound, kind, opts) in generators {
        reg.register(bound, builtin(kind, opts)?);
    }
    Ok(Monitor::new(
        &f,
        Arc::new(domain),
        reg,
        MonitorConfig { give_up },
    )?)
}

/// Result of feeding traces one at a time into an open observation and
/// closing it after the last one.
#[derive(Clone, Debug)]
pub struct Incremental {
    pub verdict: Verdict,
    /// Traces inserted before the verdict became conclusive.
    pub decided_after: Option<usize>,
    pub processed: usize,
    pub cpu: Duration,
    pub wall: Duration,
}

/// Feeds complete traces one by one, stopping early on a conclusive
/// verdict or when `budget` of wall time is used up.
pub fn feed_incrementally(
    m: &mut Monitor,
    traces: &[Trace],
    budget: Option<Duration>,
) -> Result<Incremental> {
    let start = Instant::now();
    let cpu0 = thread_cpu_time();
    let mut obs = Observation::new();
    let mut verdict = Verdict::Unknown;
    let mut decided_after = None;
    for t in traces {
        if budget.is_some_and(|b| start.elapsed() > b) {
            break;
        }
        obs.insert_trace(t.clone()).map_err(|error| Error::Update {
            path: "<generated>".into(),
            line: obs.len() + 1,
            error,
        })?;
        verdict = m.run(&obs)?;
        if verdict.is_conclusive() || verdict == Verdict::GaveUp {
            decided_after = verdict.is_conclusive().then_some(obs.len());
            break;
        }
    }
    let processed = obs.len();
    if verdict == Verdict::Unknown && processed == traces.len() {
        obs.close();
        verdict = m.run(&obs)?;
    }
    Ok(Incremental {
        verdict,
        decided_after,
        processed,
        cpu: thread_cpu_time().saturating_sub(cpu0),
        wall: start.elapsed(),
    })
}

/// One observational-determinism trial on runs of the leaky robot with a
/// planted violating pair. `samples` selects the formula with the
/// sampling generator and its sample count; `None` monitors observed
/// pairs only.
pub fn od_trial(
    seed: u64,
    count: usize,
    input_len: usize,
    samples: Option<usize>,
) -> Result<Incremental> {
    let w = OdWorkload {
        seed,
        input_len,
        count,
        plant: true,
        ..OdWorkload::default()
    };
    let data = gen_od_traces(&w);
    let mut m = match samples {
        Some(n) => {
            let opts = Options::default()
                .with("n", &n.to_string())
                .with("seed", &seed.to_string())
                .with("strategy", &w.strategy_seed.to_string())
                .with("leak", &w.leak.to_string());
            library_monitor(
                "od-robot-samples",
                &[("samples", "samples", opts)],
                count + 1,
            )?
        }
        None => library_monitor("od-robot", &[], count + 1)?,
    };
    feed_incrementally(&mut m, &data.traces, None)
}

/// Monitors opacity of a robot system with the equal-area generator in
/// mode `1w` or `aat`.
pub fn opacity_run(
    system: &str,
    mode: &str,
    seed: u64,
    input_len: usize,
    count: usize,
    budget: Option<Duration>,
) -> Result<Incremental> {
    let sys = match system {
        "opaque" => OpacitySystem::opaque(),
        "non-opaque" => OpacitySystem::non_opaque(),
        s => {
            return Err(Error::Usage(format!(
                "unknown robot system `{s}` (opaque, non-opaque)"
            )))
        }
    };
    let traces = gen_opacity_traces(&sys, seed, input_len, count);
    let opts = Options::default().with("mode", mode).with("system", system);
    let mut m = library_monitor(
        "opacity-robot-eqarea",
        &[("eqarea", "eqarea", opts)],
        count + 1,
    )?;
    feed_incrementally(&mut m, &traces, budget)
}

pub fn queue_mode(mode: &str) -> Result<QueueMode> {
    match mode {
        "correct" => Ok(QueueMode::Correct),
        "bug" => Ok(QueueMode::Bug),
        m => Err(Error::Usage(format!(
            "unknown queue mode `{m}` (correct, bug)"
        ))),
    }
}

/// Monitors a linearizability formula (`lin`, `lin-legal`,
/// `lin-bounded`) on a closed set of simulated queue histories.
pub fn lin_run(
    formula: &str,
    nops: usize,
    mode: QueueMode,
    seed: u64,
    count: usize,
) -> Result<Incremental> {
    let traces = gen_queue_histories(seed, &QueueWorkload::new(nops, mode), count);
    lin_on(formula, &traces)
}

pub fn lin_on(formula: &str, traces: &[Trace]) -> Result<Incremental> {
    let gens: Vec<(&str, &str, Options)> = ["lin", "legal"]
        .into_iter()
        .filter(|g| library::get(formula).is_some_and(|src| src.contains(&format!("{g}("))))
        .map(|g| (g, g, Options::default()))
        .collect();
    let mut m = library_monitor(formula, &gens, usize::MAX)?;
    let start = Instant::now();
    let cpu0 = thread_cpu_time();
    let obs = Observation::closed_from(traces.iter().cloned()).map_err(|error| Error::Update {
        path: "<generated>".into(),
        line: 0,
        error,
    })?;
    let verdict = m.run(&obs)?;
    Ok(Incremental {
        verdict,
        decided_after: verdict.is_conclusive().then_some(traces.len()),
        processed: traces.len(),
        cpu: thread_cpu_time().saturating_sub(cpu0),
        wall: start.elapsed(),
    })
}

pub fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// A result table printed as markdown or CSV.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn markdown(&self) -> String {
        let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
        let mut out = line(&self.header);
        out += &line(&vec!["---".to_string(); self.header.len()]);
        for r in &self.rows {
            out += &line(r);
        }
        out
    }

    pub fn csv(&self) -> String {
        let field = |s: &String| {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        };
        let line = |cells: &[String]| cells.iter().map(field).collect::<Vec<_>>().join(",") + "\n";
        let mut out = line(&self.header);
        for r in &self.rows {
            out += &line(r);
        }
        out
    }
}

pub fn ms(d: Duration) -> String {
    format!("{:.1}", d.as_secs_f64() * 1e3)
}

pub fn decided(r: &Incremental) -> String {
    r.decided_after.map_or("-".into(), |n| n.to_string())
}

/// Per-trial traces until the planted violation is found, with and
/// without the sampling generator.
pub fn od_table(trials: u64, count: usize, input_len: usize, n: usize) -> Result<Table> {
    let mut t = Table::new(&[
        "seed",
        "samples: traces",
        "samples: cpu ms",
        "observed only: traces",
        "observed only: cpu ms",
    ]);
    for seed in 0..trials {
        let a = od_trial(seed, count, input_len, Some(n))?;
        let b = od_trial(seed, count, input_len, None)?;
        t.push(vec![
            seed.to_string(),
            decided(&a),
            ms(a.cpu),
            decided(&b),
            ms(b.cpu),
        ]);
    }
    Ok(t)
}

pub fn opacity_table(seed: u64, input_len: usize, count: usize) -> Result<Table> {
    let mut t = Table::new(&["system", "mode", "verdict", "traces", "cpu ms"]);
    for system in ["opaque", "non-opaque"] {
        for mode in ["1w", "aat"] {
            let r = opacity_run(system, mode, seed, input_len, count, None)?;
            t.push(vec![
                system.into(),
                mode.into(),
                r.verdict.to_string(),
                r.processed.to_string(),
                ms(r.cpu),
            ]);
        }
    }
    Ok(t)
}

pub fn queue_table(seed: u64, nops: &[usize], count: usize) -> Result<Table> {
    let mut t = Table::new(&["nops", "mode", "formula", "verdict", "cpu ms"]);
    for &n in nops {
        for mode in ["correct", "bug"] {
            for f in ["lin", "lin-legal"] {
                let r = lin_run(f, n, queue_mode(mode)?, seed, count)?;
                t.push(vec![
                    n.to_string(),
                    mode.into(),
                    f.into(),
                    r.verdict.to_string(),
                    ms(r.cpu),
                ]);
            }
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_render() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.markdown(), "| a | b |\n| --- | --- |\n| 1 | x,y |\n");
        assert_eq!(t.csv(), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }

    #[test]
    fn sampling_finds_the_leak_quickly() {
        let r = od_trial(0, 60, 4, Some(5)).unwrap();
        assert_eq!(r.verdict, Verdict::False);
        assert!(r.decided_after.unwrap() <= 10);
    }
}
