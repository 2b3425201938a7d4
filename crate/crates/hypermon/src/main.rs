use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypermon::bench::{self, Table};
use hypermon::driver::{self, Input};
use hypermon::error::{Error, Result};
use hypermon::io as jsonl;
use hypermon::setup::{self, GenBinding, Spec};
use hypermon_core::formula::library;
use hypermon_core::oracle::{Classification, Oracle};
use hypermon_core::scenarios::queue::{gen_queue_histories, QueueWorkload};
use hypermon_core::scenarios::robot::{
    gen_od_traces, gen_opacity_traces, OdWorkload, OpacitySystem,
};
use hypermon_core::transducer::{compile_atom, needs_whole_trace, Named};
use hypermon_core::{Monitor, MonitorConfig, Trace, Valuation};

/// Runtime verification of hyperproperties over sets of traces.
#[derive(Parser)]
#[command(name = "hypermon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monitor a formula over a trace file, a directory or live streams.
    Monitor(MonitorArgs),
    /// Evaluate a formula with the brute-force reference evaluator.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Write synthetic scenario traces as JSON lines.
    Gen(GenArgs),
    /// Compile the atoms of a formula to prefix automata.
    Compile(CompileArgs),
    /// Run a scenario experiment and print a table.
    Bench(BenchArgs),
    /// List the bundled formulas.
    Formulas,
}

#[derive(Args)]
struct FormulaArgs {
    /// A formula file or the name of a bundled formula.
    #[arg(long, short)]
    formula: String,
    /// Data domain: robot, queue, history or security.
    #[arg(long)]
    domain: Option<String>,
    /// Bind a generator: `name=kind[:key=value,...]`. Built-ins named in
    /// the formula are bound with default options.
    #[arg(long = "gen", value_name = "BINDING")]
    generators: Vec<GenBinding>,
}

#[derive(Args)]
struct MonitorArgs {
    #[command(flatten)]
    formula: FormulaArgs,
    /// A JSONL trace file or a directory of them; read fully, then closed.
    #[arg(
        long,
        short,
        conflicts_with = "stream",
        required_unless_present = "stream"
    )]
    traces: Option<PathBuf>,
    /// A JSONL source read as it grows (`-` for stdin); repeatable.
    #[arg(long)]
    stream: Vec<String>,
    /// Keep polling stream files at end of file until they send `close`.
    #[arg(long, requires = "stream")]
    follow: bool,
    /// Give up once a quantifier has been offered more traces than this.
    #[arg(long, default_value_t = 2048)]
    give_up: usize,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
    /// Print monitor statistics.
    #[arg(long)]
    stats: bool,
    /// Also write the JSON report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Evaluate on a closed set of complete traces.
    Eval {
        #[command(flatten)]
        formula: FormulaArgs,
        #[arg(long, short)]
        traces: PathBuf,
    },
    /// Classify a possibly open observation by enumerating its bounded
    /// extensions.
    Classify {
        #[command(flatten)]
        formula: FormulaArgs,
        #[arg(long, short)]
        traces: PathBuf,
        /// Treat the observation as open (more traces may follow).
        #[arg(long)]
        open: bool,
        /// JSONL file with one event object per line.
        #[arg(long)]
        alphabet: PathBuf,
        #[arg(long, default_value_t = 2)]
        extra_events: usize,
        #[arg(long, default_value_t = 1)]
        extra_traces: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    Od,
    Opacity,
    Queue,
}

#[derive(Args)]
struct GenArgs {
    scenario: Scenario,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Input length of robot runs.
    #[arg(long, default_value_t = 4)]
    inputs: usize,
    /// Number of traces (histories for the queue).
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Operations per process in queue histories.
    #[arg(long, default_value_t = 3)]
    nops: usize,
    /// Queue implementation: correct or bug.
    #[arg(long, default_value = "correct")]
    mode: String,
    /// Plant a violating pair in OD traces.
    #[arg(long)]
    plant: bool,
    /// Robot system for opacity traces: opaque or non-opaque.
    #[arg(long, default_value = "opaque")]
    system: String,
    /// Output file; standard output if absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    formula: FormulaArgs,
    /// Print every state and transition.
    #[arg(long)]
    dump_automaton: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Md,
    Csv,
}

#[derive(Args)]
struct BenchArgs {
    scenario: Scenario,
    #[arg(long, default_value_t = 10)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 4)]
    inputs: usize,
    /// Samples per trace for the OD generator.
    #[arg(long, default_value_t = 5)]
    samples: usize,
    /// Queue operations per process; repeatable.
    #[arg(long, default_values_t = [5usize, 10, 20])]
    nops: Vec<usize>,
    #[arg(long, value_enum, default_value_t = TableFormat::Md)]
    format: TableFormat,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HYPERMON_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("hypermon: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Monitor(a) => monitor(a),
        Command::Oracle { command } => oracle(command),
        Command::Gen(a) => generate(a),
        Command::Compile(a) => compile(a),
        Command::Bench(a) => run_bench(a),
        Command::Formulas => {
            for (name, src) in library::ALL {
                println!(
                    "{name}: {}",
                    src.split_whitespace().collect::<Vec<_>>().join(" ")
                );
            }
            Ok(0)
        }
    }
}

fn load(a: &FormulaArgs) -> Result<(Spec, setup::Bound)> {
    let spec = setup::load_formula(&a.formula, a.domain.as_deref())?;
    let gens = setup::bind_generators(&spec.formula, &a.generators)?;
    Ok((spec, gens))
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|error| Error::Io {
        path: path.clone(),
        error,
    })
}

fn monitor(a: MonitorArgs) -> Result<i32> {
    let (spec, gens) = load(&a.formula)?;
    let m = Monitor::new(
        &spec.formula,
        spec.domain.clone(),
        setup::registry(&gens),
        MonitorConfig { give_up: a.give_up },
    )?;
    let input = match a.traces {
        Some(path) => Input::Batch(path),
        None => Input::Stream {
            sources: a.stream,
            follow: a.follow,
        },
    };
    if !(a.timeout > 0.0 && a.timeout.is_finite()) {
        return Err(Error::Usage(
            "--timeout must be a positive number of seconds".into(),
        ));
    }
    let report = driver::run(m, &input, Duration::from_secs_f64(a.timeout))?;
    let json = report.to_json().to_string();
    print!("{}", report.summary(a.stats));
    println!("{json}");
    if let Some(out) = &a.out {
        write_file(out, &(json + "\n"))?;
    }
    Ok(report.outcome.exit_code())
}

fn oracle(cmd: OracleCommand) -> Result<i32> {
    match cmd {
        OracleCommand::Eval { formula, traces } => {
            let (spec, gens) = load(&formula)?;
            let obs = jsonl::read_observation(&traces)?;
            let sigma = setup::interpretation(&gens);
            let holds = Oracle::new(&spec.domain).eval(&spec.formula, obs.traces(), &sigma)?;
            println!("{}", if holds { "SATISFIED" } else { "VIOLATED" });
            Ok(if holds { 0 } else { 1 })
        }
        OracleCommand::Classify {
            formula,
            traces,
            open,
            alphabet,
            extra_events,
            extra_traces,
        } => {
            let (spec, gens) = load(&formula)?;
            let mut obs = hypermon_core::Observation::new();
            for f in jsonl::trace_files(&traces)? {
                jsonl::read_file(&f, &mut obs)?;
            }
            let letters = read_alphabet(&alphabet)?;
            let sigma = setup::interpretation(&gens);
            let c = Oracle::new(&spec.domain).classify(
                &spec.formula,
                obs.traces(),
                !open,
                &sigma,
                &letters,
                extra_events,
                extra_traces,
            )?;
            let (label, code) = match c {
                Classification::Good => ("SATISFIED", 0),
                Classification::Bad => ("VIOLATED", 1),
                Classification::Inconclusive => ("UNKNOWN", 2),
            };
            println!("{label}");
            Ok(code)
        }
    }
}

fn read_alphabet(path: &PathBuf) -> Result<Vec<Valuation>> {
    let text = fs::read_to_string(path).map_err(|error| Error::Io {
        path: path.clone(),
        error,
    })?;
    let mut out = Vec::new();
    for (n, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let format = |message: String| Error::Format {
            path: path.clone(),
            line: n + 1,
            message,
        };
        let j: serde_json::Value = serde_json::from_str(line).map_err(|e| format(e.to_string()))?;
        match jsonl::json_to_value(&j).map_err(format)? {
            hypermon_core::Value::Event(e) => out.push(e),
            _ => return Err(format("an alphabet letter is an event object".into())),
        }
    }
    Ok(out)
}

fn generate(a: GenArgs) -> Result<i32> {
    let traces: Vec<Trace> = match a.scenario {
        Scenario::Od => {
            let data = gen_od_traces(&OdWorkload {
                seed: a.seed,
                input_len: a.inputs,
                count: a.count,
                plant: a.plant,
                ..OdWorkload::default()
            });
            if let Some((i, j)) = data.planted {
                eprintln!("planted violation: t{i} and t{j}");
            }
            data.traces
        }
        Scenario::Opacity => {
            let sys = match a.system.as_str() {
                "opaque" => OpacitySystem::opaque(),
                "non-opaque" => OpacitySystem::non_opaque(),
                s => {
                    return Err(Error::Usage(format!(
                        "unknown robot system `{s}` (opaque, non-opaque)"
                    )))
                }
            };
            gen_opacity_traces(&sys, a.seed, a.inputs, a.count)
        }
        Scenario::Queue => {
            let w = QueueWorkload::new(a.nops, bench::queue_mode(&a.mode)?);
            gen_queue_histories(a.seed, &w, a.count)
        }
    };
    let mut buf = Vec::new();
    jsonl::write_traces(&mut buf, &traces, true).expect("writing to memory");
    match &a.out {
        Some(path) => fs::write(path, &buf).map_err(|error| Error::Io {
            path: path.clone(),
            error,
        })?,
        None => io::stdout().write_all(&buf).map_err(|error| Error::Io {
            path: "<stdout>".into(),
            error,
        })?,
    }
    Ok(0)
}

fn compile(a: CompileArgs) -> Result<i32> {
    let spec = setup::load_formula(&a.formula.formula, a.formula.domain.as_deref())?;
    let prenex = spec.formula.prenex().map_err(Error::Fragment)?;
    let atoms = prenex.body.atoms();
    println!("{} atoms", atoms.len());
    for (lhs, rhs) in atoms {
        print!("{lhs} <= {rhs}: ");
        if needs_whole_trace(lhs) || needs_whole_trace(rhs) {
            println!("compiled once its traces terminate");
            continue;
        }
        let pa = compile_atom(lhs, rhs, &spec.domain).map_err(|error| {
            Error::Monitor(hypermon_core::monitor::MonitorError::Compile {
                atom: format!("{lhs} <= {rhs}"),
                error,
            })
        })?;
        println!(
            "{} states, {} transitions",
            pa.live_states(),
            pa.transition_count()
        );
        if a.dump_automaton {
            print!(
                "{}",
                Named {
                    domain: &spec.domain,
                    item: &pa
                }
            );
        }
    }
    Ok(0)
}

fn run_bench(a: BenchArgs) -> Result<i32> {
    let table: Table = match a.scenario {
        Scenario::Od => bench::od_table(a.trials, a.count, a.inputs, a.samples)?,
        Scenario::Opacity => bench::opacity_table(a.seed, a.inputs, a.count)?,
        Scenario::Queue => bench::queue_table(a.seed, &a.nops, a.count.min(20))?,
    };
    print!(
        "{}",
        match a.format {
            TableFormat::Md => table.markdown(),
            TableFormat::Csv => table.csv(),
        }
    );
    Ok(0)
}
