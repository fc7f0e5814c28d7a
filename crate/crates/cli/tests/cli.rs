use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_divmarkov");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("DIVMARKOV_THREADS")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn divergence_in_both_modes() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"alphabet":["a","b"],"probs":[0.25,0.75]}"#);
    let q = write(&dir, "q.json", r#"{"alphabet":["a","b"],"probs":["1/2","1/2"]}"#);
    let out = run(&["divergence", s(&p), s(&q)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let expected = 0.25 * (0.5f64).ln() + 0.75 * (1.5f64).ln();
    assert!((v["value"].as_f64().unwrap() - expected).abs() < 1e-15);
    let out = run(&["--mode", "rational", "--family", "tv", "divergence", s(&p), s(&q)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["value"], "1/4");
}

#[test]
fn unsupported_support_gives_infinity() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"probs":[0.5,0.5]}"#);
    let q = write(&dir, "q.json", r#"{"probs":[1,0]}"#);
    let out = run(&["divergence", s(&p), s(&q)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["value"], "inf");
}

#[test]
fn csv_output_has_a_header() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"probs":[0.5,0.25,0.25]}"#);
    let out = run(&["--format", "csv", "entropy", s(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("family,value,closed_form,residual,argmax"));
    assert!(lines.next().unwrap().starts_with("kl,"));
}

#[test]
fn entropy_and_mutual_information_agree_on_the_diagonal() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"probs":[0.5,0.25,0.25]}"#);
    let r = write(
        &dir,
        "r.json",
        r#"{"pair_of":[["0","1","2"],["0","1","2"]],"probs":[0.5,0,0,0,0.25,0,0,0,0.25]}"#,
    );
    for family in ["kl", "tv", "renyi:0.5", "tsallis:2"] {
        let h = json_of(&run(&["--family", family, "entropy", s(&p)]))["value"]
            .as_f64()
            .unwrap();
        let i = json_of(&run(&["--family", family, "mi", s(&r)]))["value"]
            .as_f64()
            .unwrap();
        assert!((h - i).abs() < 1e-12, "{family}");
    }
}

#[test]
fn conditional_commands_run() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"alphabet":["a","b"],"probs":[0.5,0.5]}"#);
    let f = write(&dir, "f.json", r#"{"source":["a","b"],"matrix":[[0.9,0.2],[0.1,0.8]]}"#);
    let g = write(&dir, "g.json", r#"{"source":["a","b"],"matrix":[[0.5,0.5],[0.5,0.5]]}"#);
    let out = run(&["conditional", "divergence", s(&f), s(&g), "--source", s(&p)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json_of(&out)["value"].as_f64().unwrap() > 0.0);
    let out = run(&["conditional", "entropy", s(&f), "--source", s(&p)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "good.json", r#"{"probs":[0.5,0.5]}"#);
    let bad = write(&dir, "bad.json", r#"{"probs":[0.5,0.6]}"#);
    let malformed = write(&dir, "malformed.json", "{probs");
    let negative = write(&dir, "neg.json", r#"{"source":["a"],"matrix":[[1.5],[-0.5]]}"#);
    assert_eq!(run(&["entropy", s(&good)]).status.code(), Some(0));
    assert_eq!(run(&["divergence", s(&bad), s(&good)]).status.code(), Some(3));
    assert_eq!(run(&["entropy", s(&negative)]).status.code(), Some(3));
    assert_eq!(run(&["entropy", s(&malformed)]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["--family", "renyi:-1", "entropy", s(&good)]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["scan", "--op", "entropy", "--p", "cauchy:0,1"]).status.code(),
        Some(2)
    );
    let none = run(&["hunt", "--budget", "100"]);
    assert_eq!(none.status.code(), Some(1));
    assert!(json_of(&none)["witness"].is_null());
}

#[test]
fn distributions_round_trip_through_the_hunt_output() {
    let dir = TempDir::new().unwrap();
    let witness = dir.path().join("w.json");
    let out = run(&[
        "--family",
        "tsallis:2",
        "hunt",
        "--budget",
        "5000",
        "--seed",
        "7",
        "--out",
        s(&witness),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(&witness).unwrap()).unwrap();
    let p = write(&dir, "p.json", &v["instance"]["p"].to_string());
    let again = json_of(&run(&["--family", "kl", "entropy", s(&p)]));
    assert_eq!(again["family"], "kl");
    let probs: Vec<f64> = v["instance"]["p"]["probs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let h: f64 = -probs.iter().filter(|x| **x > 0.0).map(|x| x * x.ln()).sum::<f64>();
    assert!((again["value"].as_f64().unwrap() - h).abs() < 1e-12);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let jobs: [&[&str]; 3] = [
        &["--family", "tv", "check", "--budget", "500", "--seed", "3"],
        &["--family", "tsallis:2", "hunt", "--budget", "2000", "--seed", "11"],
        &[
            "--family",
            "renyi:2",
            "scan",
            "--op",
            "divergence",
            "--p",
            "normal:0,1",
            "--q",
            "normal:1,1",
            "--depth",
            "8",
        ],
    ];
    for (k, job) in jobs.iter().enumerate() {
        let mut files = Vec::new();
        for (run_id, threads) in [(0, "1"), (1, "4")] {
            let path = dir.path().join(format!("{k}-{run_id}.json"));
            let mut args = job.to_vec();
            args.extend(["-o", s(&path)]);
            let status = Command::new(BIN)
                .args(&args)
                .env("DIVMARKOV_THREADS", threads)
                .status()
                .unwrap();
            assert_eq!(status.code(), Some(0));
            files.push(fs::read(&path).unwrap());
        }
        assert_eq!(files[0], files[1], "job {k}");
    }
}

#[test]
fn scans_report_monotone_values() {
    let out = run(&[
        "--family",
        "tv",
        "scan",
        "--op",
        "divergence",
        "--p",
        "normal:0,1",
        "--q",
        "normal:1,1",
        "--depth",
        "12",
        "--window=-8,8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["monotone"], true);
    let last = v["values"].as_array().unwrap().last().unwrap().as_f64().unwrap();
    assert!((last - 0.3829).abs() < 1e-3);
    assert_eq!(
        run(&["--mode", "rational", "scan", "--op", "entropy", "--p", "normal:0,1"])
            .status
            .code(),
        Some(2)
    );
}
