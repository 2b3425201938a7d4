use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value as Json;

fn hypermon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypermon"))
        .args(args)
        .output()
        .expect("run hypermon")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn report(out: &Output) -> Json {
    let text = String::from_utf8_lossy(&out.stdout);
    let last = text.lines().last().unwrap_or_else(|| {
        panic!(
            "no output; stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    });
    serde_json::from_str(last).expect("last line is JSON")
}

fn generate(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = hypermon(&all);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn planted_od_violation_is_reported_with_its_witness() {
    let dir = tempfile::tempdir().unwrap();
    let traces = generate(
        dir.path(),
        "od.jsonl",
        &["od", "--plant", "--count", "40", "--seed", "3"],
    );
    let gen = hypermon(&["gen", "od", "--plant", "--count", "40", "--seed", "3"]);
    let planted = String::from_utf8_lossy(&gen.stderr).to_string();
    let out = hypermon(&[
        "monitor",
        "-f",
        "od-robot",
        "-t",
        traces.to_str().unwrap(),
        "--stats",
    ]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["verdict"], "VIOLATED");
    assert_eq!(r["traces"], 40);
    assert!(r["stats"]["tuples"].as_u64().unwrap() > 0);
    for w in r["witness"].as_array().unwrap() {
        assert!(
            planted.contains(w["trace"].as_str().unwrap()),
            "{planted} vs {w}"
        );
    }
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("verdict: VIOLATED\nwitness: p = "));
    assert!(text.contains("atoms: "));
}

#[test]
fn queue_histories_by_mode() {
    let dir = tempfile::tempdir().unwrap();
    let good = generate(
        dir.path(),
        "good.jsonl",
        &["queue", "--nops", "4", "--count", "4"],
    );
    let bad = generate(
        dir.path(),
        "bad.jsonl",
        &["queue", "--nops", "3", "--count", "6", "--mode", "bug"],
    );
    for f in ["lin", "lin-legal"] {
        let out = hypermon(&["monitor", "-f", f, "-t", good.to_str().unwrap()]);
        assert_eq!(
            (code(&out), report(&out)["verdict"].clone()),
            (0, Json::from("SATISFIED")),
            "{f}"
        );
        let out = hypermon(&["monitor", "-f", f, "-t", bad.to_str().unwrap()]);
        assert_eq!(code(&out), 1, "{f}");
        let out = hypermon(&["oracle", "eval", "-f", f, "-t", bad.to_str().unwrap()]);
        assert_eq!(code(&out), 1, "{f}");
        assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "VIOLATED");
    }
}

#[test]
fn a_directory_is_read_in_name_order() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("b.jsonl"),
        "{\"trace\":\"u\",\"event\":{\"x\":\"b\"}}\n{\"trace\":\"u\",\"end\":true}\n",
    )
    .unwrap();
    fs::write(
        dir.path().join("a.jsonl"),
        "{\"trace\":\"t\",\"event\":{\"x\":\"a\"}}\n{\"trace\":\"t\",\"end\":true}\n",
    )
    .unwrap();
    fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let f = dir.path().join("same.hl");
    fs::write(
        &f,
        "# every trace starts like every other\nforall p . forall q . x(p)[0] = x(q)[0]\n",
    )
    .unwrap();
    let out = hypermon(&[
        "monitor",
        "-f",
        f.to_str().unwrap(),
        "-t",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["traces"], 2);
    assert_eq!(r["closed"], true);
    let w: Vec<&str> = r["witness"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w["trace"].as_str().unwrap())
        .collect();
    assert!(w.contains(&"t") && w.contains(&"u"), "{w:?}");
}

#[test]
fn streams_close_only_when_every_source_closes() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("prefix.hl");
    fs::write(&f, "forall p . forall q . x(p) <= x(q) | x(q) <= x(p)").unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    fs::write(&a, "{\"trace\":\"t\",\"event\":{\"x\":\"a\"}}\n{\"trace\":\"t\",\"end\":true}\n{\"close\":true}\n").unwrap();
    fs::write(&b, "{\"trace\":\"u\",\"event\":{\"x\":\"a\"}}\n{\"trace\":\"u\",\"event\":{\"x\":\"b\"}}\n{\"trace\":\"u\",\"end\":true}\n").unwrap();
    let (fa, fb) = (a.to_str().unwrap(), b.to_str().unwrap());
    let out = hypermon(&[
        "monitor",
        "-f",
        f.to_str().unwrap(),
        "--stream",
        fa,
        "--stream",
        fb,
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(report(&out)["verdict"], "UNKNOWN");
    assert_eq!(report(&out)["closed"], false);

    fs::OpenOptions::new()
        .append(true)
        .open(&b)
        .unwrap()
        .write_all(b"{\"close\":true}\n")
        .unwrap();
    let out = hypermon(&[
        "monitor",
        "-f",
        f.to_str().unwrap(),
        "--stream",
        fa,
        "--stream",
        fb,
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["verdict"], "SATISFIED");
    assert_eq!(report(&out)["closed"], true);
}

#[test]
fn standard_input_stream_stops_at_the_first_violation() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("first.hl");
    fs::write(&f, "forall p . forall q . x(p)[0] = x(q)[0]").unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_hypermon"))
        .args(["monitor", "-f", f.to_str().unwrap(), "--stream", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    stdin
        .write_all(b"{\"trace\":\"t\",\"event\":{\"x\":\"a\"}}\n{\"trace\":\"u\",\"event\":{\"x\":\"b\"}}\n")
        .unwrap();
    // Standard input stays open: the verdict must not wait for it.
    let out = child.wait_with_output().unwrap();
    drop(stdin);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out)["verdict"], "VIOLATED");
}

#[test]
fn a_followed_stream_that_never_closes_times_out() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.hl");
    fs::write(&f, "forall p . x(p) <= x(p)").unwrap();
    let s = dir.path().join("s.jsonl");
    fs::write(&s, "{\"trace\":\"t\",\"event\":{\"x\":\"a\"}}\n").unwrap();
    let out = hypermon(&[
        "monitor",
        "-f",
        f.to_str().unwrap(),
        "--stream",
        s.to_str().unwrap(),
        "--follow",
        "--timeout",
        "0.5",
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(report(&out)["verdict"], "TIMEOUT");
}

#[test]
fn the_report_can_be_written_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let traces = generate(
        dir.path(),
        "q.jsonl",
        &["queue", "--nops", "2", "--count", "2"],
    );
    let out_file = dir.path().join("report.json");
    let out = hypermon(&[
        "monitor",
        "-f",
        "lin",
        "-t",
        traces.to_str().unwrap(),
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let saved: Json = serde_json::from_str(&fs::read_to_string(&out_file).unwrap()).unwrap();
    assert_eq!(saved["verdict"], report(&out)["verdict"]);
}

#[test]
fn give_up_bound_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let traces = generate(dir.path(), "od.jsonl", &["od", "--count", "30"]);
    let out = hypermon(&[
        "monitor",
        "-f",
        "od-robot",
        "-t",
        traces.to_str().unwrap(),
        "--give-up",
        "5",
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(report(&out)["verdict"], "UNKNOWN-GAVE-UP");
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("t.jsonl");
    fs::write(&traces, "{\"trace\":\"t\",\"event\":{\"x\":\"a\"}}\n").unwrap();
    let t = traces.to_str().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };

    let bad_syntax = write("syntax.hl", "forall p . x(p) <=");
    let out = hypermon(&["monitor", "-f", &bad_syntax, "-t", t]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));

    let unknown_gen = write("gen.hl", "forall p . exists q in nosuch(p) . x(p) = x(q)");
    assert_eq!(
        code(&hypermon(&["monitor", "-f", &unknown_gen, "-t", t])),
        4
    );
    let alternating = write("alt.hl", "forall p . exists q . x(p) = x(q)");
    assert_eq!(
        code(&hypermon(&["monitor", "-f", &alternating, "-t", t])),
        4
    );
    assert_eq!(
        code(&hypermon(&[
            "monitor",
            "-f",
            "lin",
            "--gen",
            "lin=samples:bogus=1",
            "-t",
            t
        ])),
        4
    );

    let missing = dir.path().join("missing.jsonl");
    assert_eq!(
        code(&hypermon(&[
            "monitor",
            "-f",
            "lin",
            "-t",
            missing.to_str().unwrap()
        ])),
        5
    );
    let broken = write(
        "broken.jsonl",
        "{\"trace\":\"t\",\"event\":{\"x\":\"a\"}}\n{\"trace\":\"t\",\"event\":{\"x\":1.5}}\n",
    );
    let out = hypermon(&["monitor", "-f", "lin", "-t", &broken]);
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.jsonl:2:"));
    let after_end = write(
        "after.jsonl",
        "{\"trace\":\"t\",\"end\":true}\n{\"trace\":\"t\",\"event\":{\"x\":\"a\"}}\n",
    );
    assert_eq!(
        code(&hypermon(&["monitor", "-f", "lin", "-t", &after_end])),
        5
    );

    assert_eq!(code(&hypermon(&["monitor", "-f", "lin"])), 64);
    assert_eq!(
        code(&hypermon(&["monitor", "-f", "no-such-formula", "-t", t])),
        64
    );
    assert_eq!(code(&hypermon(&["--help"])), 0);
}

#[test]
fn oracle_classifies_open_observations() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.hl");
    fs::write(&f, "forall p . forall q . x(p)[0] = x(q)[0]").unwrap();
    let traces = dir.path().join("t.jsonl");
    fs::write(
        &traces,
        "{\"trace\":\"t\",\"event\":{\"x\":\"a\"}}\n{\"trace\":\"u\",\"event\":{\"x\":\"b\"}}\n",
    )
    .unwrap();
    let alphabet = dir.path().join("sigma.jsonl");
    fs::write(&alphabet, "{\"x\":\"a\"}\n{\"x\":\"b\"}\n").unwrap();
    let (f, t, a) = (
        f.to_str().unwrap(),
        traces.to_str().unwrap(),
        alphabet.to_str().unwrap(),
    );
    let out = hypermon(&[
        "oracle",
        "classify",
        "-f",
        f,
        "-t",
        t,
        "--alphabet",
        a,
        "--open",
    ]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    fs::write(&traces, "{\"trace\":\"t\",\"event\":{\"x\":\"a\"}}\n").unwrap();
    let out = hypermon(&[
        "oracle",
        "classify",
        "-f",
        f,
        "-t",
        t,
        "--alphabet",
        a,
        "--open",
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "UNKNOWN");
    let out = hypermon(&["oracle", "classify", "-f", f, "-t", t, "--alphabet", a]);
    assert_eq!(code(&out), 0);
}

#[test]
fn compile_dumps_automata() {
    let out = hypermon(&["compile", "-f", "od-example", "--dump-automaton"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("3 atoms\n"));
    assert!(text.contains("prefix automaton: "));
    assert!(text.contains("accept"));
}

#[test]
fn bench_tables() {
    let out = hypermon(&[
        "bench", "opacity", "--count", "5", "--inputs", "4", "--format", "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "system,mode,verdict,traces,cpu ms");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("opaque,1w,true,5,"));
    assert!(lines[3].starts_with("non-opaque,1w,false,"));
    let out = hypermon(&["bench", "od", "--trials", "1", "--count", "30"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("| seed | samples: traces |"));
}

#[test]
fn library_formulas_are_listed() {
    let out = hypermon(&["formulas"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text
        .lines()
        .any(|l| l.starts_with("lin: forall p . exists l in lin(p) . true")));
}
