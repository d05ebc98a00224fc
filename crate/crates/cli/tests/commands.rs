use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::thread;
use std::time::Duration;

use rsx_core::properties::{generate_initial, GenSpec};
use rsx_core::surface::print;
use rsx_stepper::{Request, Stepper};
use serde_json::{json, Value};
use tempfile::TempDir;

const INT_EXCHANGE: &str = "-- int exchange\nproc[]{ ~a(x:!int.end). x!<5>. 0 } store{} | proc[]{ a(y:?int.end). y?(z). 0 } store{}\n";

fn rsx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsx")).args(args).env("RSX_COLOR", "never").output().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn records(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_nil() {
    let d = TempDir::new().unwrap();
    let o = rsx(&["check", s(&write(&d, "z.rsx", "0\n"))]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0\n");
}

#[test]
fn check_rejects_bad_input() {
    let d = TempDir::new().unwrap();
    let o = rsx(&["check", s(&write(&d, "bad.rsx", "proc[]{ a(x:!int.end). store{}"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error:"));
    let o = rsx(&["check", s(&d.path().join("missing.rsx"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_int_exchange_takes_two_steps_then_sticks() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "ie.rsx", INT_EXCHANGE);
    let o = rsx(&["run", s(&f), "--steps", "10"]);
    assert!(o.status.success());
    let recs = records(&stdout(&o));
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[0]["step"], 0);
    assert_eq!(recs[0]["rule"], Value::Null);
    assert_eq!(recs[1]["rule"], "Open");
    assert_eq!(recs[1]["direction"], "forward");
    assert_eq!(recs[1]["label"]["service"], "a");
    assert_eq!(recs[2]["rule"], "Com");
    assert_eq!(recs[2]["label"]["endpoints"], json!(["s0", "~s0"]));
    assert!(stderr(&o).contains("stuck after 2 steps"));
}

#[test]
fn undo_after_run_returns_to_canonical_input() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "ie.rsx", INT_EXCHANGE);
    let canonical = stdout(&rsx(&["check", s(&f)]));
    let t = d.path().join("t.jsonl");
    assert!(rsx(&["run", s(&f), "--out", s(&t)]).status.success());
    let o = rsx(&["undo", s(&t), "--steps", "2"]);
    assert!(o.status.success());
    let recs = records(&stdout(&o));
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[1]["rule"], "ComU");
    assert_eq!(recs[2]["rule"], "OpenU");
    assert_eq!(format!("{}\n", recs[2]["config"].as_str().unwrap()), canonical);
}

#[test]
fn undo_accepts_a_runtime_configuration() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "ie.rsx", INT_EXCHANGE);
    let last = records(&stdout(&rsx(&["run", s(&f)]))).pop().unwrap();
    let g = write(&d, "end.rsx", last["config"].as_str().unwrap());
    let o = rsx(&["undo", s(&g)]);
    assert!(o.status.success());
    assert_eq!(records(&stdout(&o)).len(), 3);
    assert!(stderr(&o).contains("configuration is initial"));
}

#[test]
fn run_k_then_undo_k_for_every_k() {
    let d = TempDir::new().unwrap();
    for seed in [1u64, 5, 11] {
        let f = write(&d, "g.rsx", &print(&generate_initial(&GenSpec::with_seed(seed))));
        let initial = records(&stdout(&rsx(&["run", s(&f), "--steps", "0"])))[0]["config"].clone();
        let full = records(&stdout(&rsx(&["run", s(&f), "--policy", "random", "--seed", "3"]))).len() - 1;
        for k in 0..=full {
            let t = d.path().join(format!("t{k}.jsonl"));
            let ks = k.to_string();
            assert!(rsx(&["run", s(&f), "--steps", &ks, "--policy", "random", "--seed", "3", "--out", s(&t)]).status.success());
            let back = records(&stdout(&rsx(&["undo", s(&t), "--steps", &ks])));
            assert_eq!(back.len(), k + 1);
            assert_eq!(back[k]["config"], initial, "seed {seed} k {k}");
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "g.rsx", &print(&generate_initial(&GenSpec::with_seed(7))));
    for policy in ["first", "random"] {
        let a = rsx(&["run", s(&f), "--policy", policy, "--seed", "9"]);
        let b = rsx(&["run", s(&f), "--policy", policy, "--seed", "9"]);
        assert_eq!(a.stdout, b.stdout);
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn replay_detects_tampering() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "ie.rsx", INT_EXCHANGE);
    let text = stdout(&rsx(&["run", s(&f)]));
    let good = write(&d, "good.jsonl", &text);
    let o = rsx(&["replay", s(&good)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), records(&text)[2]["config"].as_str().unwrap());
    let bad = write(&d, "bad.jsonl", &text.replace("x1 = [5]", "x1 = [6]"));
    let o = rsx(&["replay", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("step 2"));
}

#[test]
fn props_small_corpus_passes() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("r.jsonl");
    let o = rsx(&["props", "--corpus", "20", "--seed", "100", "--budget", "5000", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    for check in ["loop", "square", "causal", "normal_form"] {
        assert!(text.contains(&format!("PASS {check}: 20 programs")), "{text}");
    }
    let recs = records(&std::fs::read_to_string(out).unwrap());
    assert_eq!(recs.len(), 20);
    assert_eq!(recs[0]["seed"], 100);
    assert_eq!(recs[19]["seed"], 119);
}

#[test]
fn stepper_session_matches_cli_replay() {
    let st = Stepper::new();
    let r = st.handle(&Request::load(1, INT_EXCHANGE));
    let sid = r.session.clone().unwrap();
    let root = r.canonical.clone().unwrap();
    let open = r.redexes.unwrap().forward[0].key.clone();
    let r = st.handle(&Request::apply(2, &sid, &open));
    let com = r.redexes.unwrap().forward[0].key.clone();
    let stale = st.handle(&Request::apply(3, &sid, &open));
    assert!(!stale.ok);
    let r = st.handle(&Request::redexes(4, &sid));
    assert_eq!(r.redexes.as_ref().unwrap().forward[0].key, com);
    st.handle(&Request::apply(5, &sid, &com));
    let mut r = st.handle(&Request::redexes(6, &sid));
    for id in 7..9 {
        let bw = r.redexes.unwrap().backward[0].key.clone();
        r = st.handle(&Request::apply(id, &sid, &bw));
        assert!(r.ok);
    }

    // Rebuild the session's history as a trace and let the CLI replay it.
    let state = st.session(&sid).unwrap();
    let state = state.lock().unwrap();
    let mut trace = vec![json!({"step": 0, "direction": null, "rule": null, "label": null, "redex": null, "config": root})];
    let mut configs: Vec<_> = state.history.iter().skip(1).map(|(_, c)| c.clone()).collect();
    configs.push(state.current.clone());
    for (i, ((redex, _), after)) in state.history.iter().zip(configs).enumerate() {
        trace.push(json!({
            "step": i + 1,
            "direction": redex.direction(),
            "rule": redex.rule,
            "label": rsx_core::semantics::LabelView::from(&redex.label()),
            "redex": redex.key(),
            "config": rsx_core::canonicalize(&after).text(),
        }));
    }
    let d = TempDir::new().unwrap();
    let body: String = trace.iter().map(|v| format!("{v}\n")).collect();
    let f = write(&d, "ui.jsonl", &body);
    let o = rsx(&["replay", s(&f)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), r.canonical.unwrap());
    assert_eq!(stdout(&o).trim(), root);
}

#[test]
fn serve_speaks_the_protocol_on_rsx_port() {
    let port = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let mut child = Command::new(env!("CARGO_BIN_EXE_rsx"))
        .arg("serve")
        .env("RSX_PORT", port.to_string())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut conn = None;
    for _ in 0..100 {
        if let Ok(c) = TcpStream::connect(("127.0.0.1", port)) {
            conn = Some(c);
            break;
        }
        thread::sleep(Duration::from_millis(50));
    }
    let conn = conn.expect("server came up");
    let mut w = conn.try_clone().unwrap();
    let mut rd = BufReader::new(conn);
    writeln!(w, "{}", json!({"id": 42, "op": "load", "text": INT_EXCHANGE})).unwrap();
    let mut line = String::new();
    rd.read_line(&mut line).unwrap();
    child.kill().unwrap();
    let _ = child.wait();
    let v: Value = serde_json::from_str(&line).unwrap();
    assert_eq!(v["id"], 42);
    assert_eq!(v["ok"], true);
    assert_eq!(v["redexes"]["forward"].as_array().unwrap().len(), 1);
    assert_eq!(v["redexes"]["backward"].as_array().unwrap().len(), 0);
}
