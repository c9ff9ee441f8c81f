use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gpvortex_cli::exit;

fn gpvortex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpvortex"))
        .args(args)
        .env_remove("GPVORTEX_CACHE")
        .env("RUST_LOG", "info")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_field(path: &Path) {
    let mut s = String::from("r,phi_re,phi_im,psi_re,psi_im\n");
    for i in 1..=400 {
        let r = 0.04 * i as f64;
        let g = (-(r - 4.0f64).powi(2)).exp();
        s.push_str(&format!("{r},{g},0,{},0\n", 0.5 * g));
    }
    fs::write(path, s).unwrap();
}

#[test]
fn missing_required_argument_is_a_usage_error() {
    let o = gpvortex(&["roots"]);
    assert_eq!(code(&o), exit::USAGE);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--lambda"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(code(&gpvortex(&["profile", "--bogus"])), exit::USAGE);
    assert_eq!(code(&gpvortex(&["jost", "--lambda", "3", "--label", "psi3"])), exit::USAGE);
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(code(&gpvortex(&["--help"])), exit::OK);
    assert_eq!(code(&gpvortex(&["--version"])), exit::OK);
}

#[test]
fn malformed_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[profile]\nn = \"one\"\n").unwrap();
    assert_eq!(code(&gpvortex(&["--config", p(&cfg), "config"])), exit::CONFIG);
    fs::write(&cfg, "[oracle]\ndt = -1.0\n").unwrap();
    assert_eq!(code(&gpvortex(&["--config", p(&cfg), "config"])), exit::CONFIG);
    fs::write(&cfg, "[nonsense]\nx = 1\n").unwrap();
    assert_eq!(code(&gpvortex(&["--config", p(&cfg), "config"])), exit::CONFIG);
}

#[test]
fn missing_files_have_their_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let nowhere = dir.path().join("absent.csv");
    assert_eq!(code(&gpvortex(&["--config", p(&nowhere), "config"])), exit::MISSING);
    assert_eq!(code(&gpvortex(&["transform", "--input", p(&nowhere)])), exit::MISSING);
    assert_eq!(code(&gpvortex(&["plot", "--input", p(&nowhere), "--out", "x.svg"])), exit::MISSING);
}

#[test]
fn written_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    assert_eq!(code(&gpvortex(&["config", "--out", p(&cfg)])), exit::OK);
    let o = gpvortex(&["--config", p(&cfg), "config"]);
    assert_eq!(code(&o), exit::OK);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), fs::read_to_string(&cfg).unwrap());
}

#[test]
fn profile_output_is_deterministic_and_plottable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, svg) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("p.svg"));
    for out in [&a, &b] {
        assert_eq!(code(&gpvortex(&["profile", "--nodes", "1024", "--out", p(out)])), exit::OK);
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(text.starts_with("# gpvortex"));
    assert!(text.contains("# config_hash = "));
    assert!(text.contains("\nr,rho,rho_prime\n"));
    assert_eq!(code(&gpvortex(&["plot", "--input", p(&a), "--out", p(&svg)])), exit::OK);
    let figure = fs::read_to_string(&svg).unwrap();
    assert!(figure.contains("<svg") && figure.contains("config_hash"));
}

#[test]
fn roots_sweep_writes_one_record_per_step() {
    let o = gpvortex(&["roots", "--lambda", "-4", "--lambda-end", "4", "--steps", "5", "--im", "0.5"]);
    assert_eq!(code(&o), exit::OK);
    let out = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("{\"header\""));
    for l in &lines[1..] {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert!(v["residual"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn roots_outside_the_domain_are_a_usage_error() {
    assert_eq!(code(&gpvortex(&["roots", "--lambda", "nan"])), exit::USAGE);
}

#[test]
fn jost_reuses_cached_branches() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let args = |out: &Path| {
        vec![
            "--cache-dir".to_string(),
            p(&cache).to_string(),
            "jost".into(),
            "--lambda".into(),
            "3".into(),
            "--label".into(),
            "psi1".into(),
            "--free".into(),
            "--nodes".into(),
            "200".into(),
            "--out".into(),
            p(out).to_string(),
        ]
    };
    let first = gpvortex(&args(&a).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&first), exit::OK);
    assert!(String::from_utf8_lossy(&first.stderr).contains("miss"));
    let second = gpvortex(&args(&b).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&second), exit::OK);
    assert!(String::from_utf8_lossy(&second.stderr).contains("hit"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(fs::read_dir(&cache).unwrap().count() >= 1);
}

#[test]
fn free_evolution_at_time_zero_reproduces_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("f.csv"), dir.path().join("e.csv"));
    write_field(&input);
    let o = gpvortex(&["evolve", "--free", "--t", "0,0.5", "--input", p(&input), "--out", p(&out)]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('t'))
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 800);
    let (mut err, mut norm) = (0.0, 0.0);
    for row in rows.iter().filter(|r| r[0] == 0.0) {
        let g = (-(row[1] - 4.0f64).powi(2)).exp();
        err += (row[2] - g).powi(2) + row[3].powi(2) + (row[4] - 0.5 * g).powi(2) + row[5].powi(2);
        norm += 1.25 * g * g;
    }
    assert!((err / norm).sqrt() < 1e-2, "relative error {}", (err / norm).sqrt());
}

#[test]
fn validate_reports_and_exits_by_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = gpvortex(&["validate", "--criterion", "2,3", "--report", p(&report)]);
    assert_eq!(code(&o), exit::OK);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("criterion  2") && out.contains("criterion  3"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(v.to_string().contains("\"passed\":true"));
    assert_eq!(code(&gpvortex(&["validate", "--suite", "nope"])), exit::USAGE);
}
