use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{rngs::StdRng, Rng, SeedableRng};
use serde_json::Value;
use tempfile::TempDir;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace { dir: TempDir::new().unwrap() };
        ws.write("fib.sub", "# Fibonacci\na -> ab\nb -> a\n");
        ws.write("trib.sub", "a -> ab\nb -> ac\nc -> a\n");
        ws.write("pair.sub", "a -> aab\nb -> ba\n");
        ws.write("tm.sub", "a -> ab\nb -> ba\n");
        ws.write("fig2.sub", "a -> aab\nb -> bbaab\n");
        ws.write("dup.sub", "a -> ab\na -> ba\n");
        ws.write("undeclared.sub", "a -> ax\n");
        ws
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_subdyn"))
            .current_dir(self.dir.path())
            .env_remove("SUBDYN_HORIZON")
            .args(args)
            .output()
            .unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn classify_outputs() {
    let ws = Workspace::new();
    let o = ws.run(&["classify", "fib.sub"]);
    assert_eq!(code(&o), 0);
    let j = json(&o);
    assert_eq!(j["char_poly"], serde_json::json!([-1, -1, 1]));
    assert_eq!(j["pisot"], "yes");
    assert_eq!(j["irreducible"], true);
    let o = ws.run(&["classify", "tm.sub", "--format", "text"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("irreducible         no"));
}

#[test]
fn input_errors_exit_two() {
    let ws = Workspace::new();
    for args in [
        vec!["classify", "dup.sub"],
        vec!["classify", "undeclared.sub"],
        vec!["classify", "missing.sub"],
        vec!["expand", "fib.sub", "--seed", "z", "--length", "5"],
        vec!["occurrences", "fib.sub", "--seed", "a", "--factor", "x"],
        vec!["gaps", "fib.sub", "--seed", "a", "--factor", ""],
        vec!["proximal", "fib.sub", "--seeds", "a,b"],
        vec!["coincide", "fib.sub", "--seeds", "a,b"],
        vec!["num", "encode", "fib.sub", "--start", "b", "3"],
        vec!["num", "decode", "fib.sub", "a: e.a"],
        vec!["num", "list", "fib.sub", "--start", "a", "--count", "0"],
        vec!["num", "sync", "fib.sub", "--seeds", "a,b", "--to", "10"],
        vec!["ipset", "search", "fib.sub", "--seed", "a", "--factor", "a", "--depth", "0"],
        vec!["ipset", "verify", "fib.sub", "--seed", "a", "--factor", "a"],
        vec!["strand", "scan", "tm.sub", "--word", "a"],
        vec!["strand", "export", "tm.sub", "--word", "a"],
        vec!["no-such-command"],
        vec!["classify"],
    ] {
        let o = ws.run(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    let o = ws.run(&["classify", "dup.sub"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2: duplicate rule"));
}

#[test]
fn expand_occurrences_gaps() {
    let ws = Workspace::new();
    let o = ws.run(&["expand", "fib.sub", "--seed", "a", "--length", "13"]);
    assert_eq!(stdout(&o).trim(), "abaababaabaab");
    let o = ws.run(&["occurrences", "fib.sub", "--seed", "a", "--factor", "ab", "--horizon", "13"]);
    assert_eq!(stdout(&o).split_whitespace().collect::<Vec<_>>(), ["0", "3", "5", "8", "11"]);
    let o = ws.run(&["gaps", "fib.sub", "--seed", "a", "--factor", "b", "--horizon", "1000"]);
    assert_eq!(json(&o)["max_gap"], 3);
}

#[test]
fn coincidence_and_exit_one() {
    let ws = Workspace::new();
    let o = ws.run(&["coincide", "pair.sub", "--seeds", "a,b"]);
    assert_eq!(code(&o), 0);
    let j = json(&o);
    assert_eq!((j["k"].as_u64(), j["c"].as_str(), j["s"].as_str()), (Some(3), Some("a"), Some("aab")));
    let o = ws.run(&["coincide", "tm.sub", "--horizon", "1000"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["kind"], "no_witness_up_to");
    let o = ws.run(&["coincide", "tm.sub", "--horizon", "1000", "--expect-witness"]);
    assert_eq!(code(&o), 1);
    let o = ws.run(&["coincide", "pair.sub", "--expect-witness"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn horizon_from_environment() {
    let ws = Workspace::new();
    let o = Command::new(env!("CARGO_BIN_EXE_subdyn"))
        .current_dir(ws.dir.path())
        .env("SUBDYN_HORIZON", "777")
        .args(["coincide", "tm.sub"])
        .output()
        .unwrap();
    assert_eq!(json(&o)["horizon"], 777);
}

#[test]
fn proximal_pair() {
    let ws = Workspace::new();
    ws.write("uni.sub", "a -> aaab\nb -> bbab\n");
    let o = ws.run(&["proximal", "uni.sub", "--seeds", "a,b", "--horizon", "4096"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["verdict"], "evidence_for");
}

#[test]
fn numeration_commands() {
    let ws = Workspace::new();
    let o = ws.run(&["num", "encode", "fib.sub", "--start", "a", "7"]);
    assert_eq!(stdout(&o).trim(), "a: a.e.a.e");
    let o = ws.run(&["num", "decode", "fig2.sub", "b: b.e", "--word"]);
    assert_eq!(stdout(&o).trim(), "5 bbaab");
    let o = ws.run(&["num", "list", "fib.sub", "--start", "a", "--count", "3"]);
    assert_eq!(stdout(&o), "0\ta: e\n1\ta: a\n2\ta: a.e\n");
    let o = ws.run(&["num", "graph", "fib.sub"]);
    let j = json(&o);
    assert_eq!(j["edges"].as_array().unwrap().len(), 3);
    let o = ws.run(&["num", "sync", "fig2.sub", "--seeds", "a,b", "--from", "5", "--to", "5"]);
    let j = json(&o);
    assert_eq!(j["synchronizing"][0]["terminal"], "b");
    let o = ws.run(&["num", "weights", "fib.sub", "--levels", "3"]);
    assert!(stdout(&o).starts_with("level,vertex,label,weight\n0,a,e,0\n0,a,a,1\n"));
}

#[test]
fn encode_decode_round_trip_through_cli() {
    let ws = Workspace::new();
    let mut rng = StdRng::seed_from_u64(7);
    for spec in ["fib.sub", "trib.sub", "fig2.sub"] {
        for _ in 0..5 {
            let l: u64 = rng.gen_range(0..1_000_000_000_000);
            let o = ws.run(&["num", "encode", spec, "--start", "a", &l.to_string()]);
            let path = stdout(&o).trim().to_string();
            let o = ws.run(&["num", "decode", spec, &path]);
            assert_eq!(stdout(&o).trim(), l.to_string(), "{spec}: {path}");
        }
    }
}

#[test]
fn ipset_commands() {
    let ws = Workspace::new();
    let o = ws.run(&["ipset", "build", "pair.sub", "--seeds", "a,b", "--count", "2", "-o", "family.json"]);
    assert_eq!(code(&o), 0);
    let fam: Value = serde_json::from_str(&std::fs::read_to_string(ws.path("family.json")).unwrap()).unwrap();
    assert_eq!(fam["generators"][0], "23");
    let o = ws.run(&["ipset", "verify", "pair.sub", "--seed", "a", "--factor", "b", "--family", "family.json", "--expect-pass"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(json(&o)["verdict"], "pass");
    let o = ws.run(&["ipset", "verify", "fib.sub", "--seed", "a", "--factor", "a", "--generators", "1", "--expect-pass"]);
    assert_eq!(code(&o), 1);
    let o = ws.run(&["ipset", "search", "fib.sub", "--seed", "a", "--factor", "a", "--depth", "3", "--horizon", "20"]);
    assert_eq!(json(&o)["generators"], serde_json::json!(["2", "3", "8"]));
    let o = ws.run(&["occurrences", "fib.sub", "--seed", "a", "--factor", "a", "--horizon", "20", "-o", "pos.txt"]);
    assert_eq!(code(&o), 0);
    let o = ws.run(&[
        "ipset", "search", "fib.sub", "--seed", "a", "--factor", "a", "--depth", "3", "--horizon", "20", "--positions",
        "pos.txt", "--format", "text",
    ]);
    assert_eq!(stdout(&o).trim(), "2 3 8");
    let o = ws.run(&["ipset", "search", "tm.sub", "--seed", "a", "--factor", "aaa", "--depth", "2", "--expect-found"]);
    assert_eq!(code(&o), 1);
    let o = ws.run(&["ipset", "build", "tm.sub", "--seeds", "a,b", "--horizon", "100"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn strand_commands() {
    let ws = Workspace::new();
    let o = ws.run(&["strand", "scan", "trib.sub", "--word", "a", "--iterations", "8"]);
    assert_eq!(code(&o), 0);
    let j = json(&o);
    assert_eq!(j["scan"]["envelopes"].as_array().unwrap().len(), 9);
    let o = ws.run(&["strand", "export", "trib.sub", "--word", "a", "--iterations", "6", "--csv", "s.csv", "--svg", "s.svg"]);
    assert_eq!(code(&o), 0);
    let svg = std::fs::read_to_string(ws.path("s.svg")).unwrap();
    let o = ws.run(&["strand", "export", "trib.sub", "--word", "a", "--iterations", "6", "--svg", "t.svg"]);
    assert_eq!(code(&o), 0);
    assert_eq!(svg, std::fs::read_to_string(ws.path("t.svg")).unwrap());
    assert!(Path::new(&ws.path("s.csv")).exists());
}

#[test]
fn outputs_are_deterministic() {
    let ws = Workspace::new();
    for args in [
        vec!["classify", "trib.sub"],
        vec!["coincide", "tm.sub", "--horizon", "5000"],
        vec!["strand", "scan", "fib.sub", "--word", "ab", "--delta-seeds", "a,a", "--delta-horizon", "100"],
    ] {
        assert_eq!(ws.run(&args).stdout, ws.run(&args).stdout, "{args:?}");
    }
}
