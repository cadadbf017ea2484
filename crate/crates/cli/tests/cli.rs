use std::path::Path;
use std::process::Command;

use qfc_cli::cli::parse_args;
use qfc_cli::{parse_config, run, CommandName, RawSettings, Value};

fn qfc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qfc")).args(args).env_remove("QFC_THREADS").output().unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn documented_invocations_parse() {
    let inv = parse_args(["qfc", "stabilize", "--p", "0.115", "--theta", "0.715", "--samples", "100000", "--seed", "7"]).unwrap();
    assert_eq!(inv.config.command, CommandName::Stabilize);
    assert_eq!(inv.config.seed, 7);
    assert_eq!(inv.config.count("samples"), 100_000);

    let inv = parse_args(["qfc", "julia", "--p-re", "1", "--p-im", "0", "--grid", "512x512", "--max-iters", "400"]).unwrap();
    assert_eq!(inv.config.grid("grid"), (512, 512));
    assert_eq!(inv.config.count("max-iters"), 400);
    assert_eq!(inv.config.real("p-re"), 1.0);
}

#[test]
fn negative_strength_names_the_field() {
    let err = parse_args(["qfc", "purify", "--k", "-1"]).err().unwrap().to_string();
    assert!(err.contains("`k`"), "{err}");
}

#[test]
fn every_invalid_field_is_listed() {
    let mut s = RawSettings::default();
    s.set("k", "-1");
    s.set("dt", "abc");
    s.set("colour", "red");
    s.set("seed", "-3");
    let err = parse_config(CommandName::Purify, &s).unwrap_err().to_string();
    for want in ["`k`", "`dt`", "colour", "`seed`"] {
        assert!(err.contains(want), "{want} missing from {err}");
    }
}

#[test]
fn file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# purify settings\nk = 2\ndt=5e-5  # small\n\ntrajectories=10\n").unwrap();
    let inv = parse_args(["qfc", "purify", "--config", cfg.to_str().unwrap(), "--k", "3"]).unwrap();
    assert_eq!(inv.config.real("k"), 3.0);
    assert_eq!(inv.config.real("dt"), 5e-5);
    assert_eq!(inv.config.count("trajectories"), 10);
    assert_eq!(inv.config.params.get("horizon"), Some(&Value::Real(2.0)));
}

#[test]
fn bad_files_and_commands_are_rejected() {
    assert!(parse_args(["qfc", "purify", "--config", "/nonexistent/qfc.cfg"]).is_err());
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "k 2\n").unwrap();
    assert!(parse_args(["qfc", "purify", "--config", cfg.to_str().unwrap()]).is_err());
    std::fs::write(&cfg, "max-iters=10\n").unwrap();
    assert!(parse_args(["qfc", "purify", "--config", cfg.to_str().unwrap()]).is_err());
    assert!(parse_args(["qfc", "fly"]).is_err());
    assert!(parse_args(["qfc", "julia", "--grid", "512"]).is_err());
    assert!(CommandName::parse("fly").is_err());
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = qfc(&["purify", "--k", "-1", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("`k`"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    let ok = qfc(&["bellpurify", "--out", dir.path().to_str().unwrap()]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
}

#[test]
fn bellpurify_writes_the_fixture_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let inv = parse_args(["qfc", "bellpurify", "--out", dir.path().to_str().unwrap()]).unwrap();
    let report = run(&inv.config).unwrap();
    assert_eq!(report.files, vec![dir.path().join("bellpurify.csv")]);
    let text = std::fs::read_to_string(dir.path().join("bellpurify.csv")).unwrap();
    assert!(text.starts_with("# qfc bellpurify\n# seed=1\n"));
    let rows = read_csv(&dir.path().join("bellpurify.csv"));
    assert_eq!(rows.len(), 31);
    let f0: f64 = rows[0][1].parse().unwrap();
    assert!((f0 - 0.5075).abs() < 1e-12);
    let f30: f64 = rows[30][1].parse().unwrap();
    assert!(f30 > 0.999);
}

#[test]
fn stabilize_records_the_argmax() {
    let dir = tempfile::tempdir().unwrap();
    let inv = parse_args(["qfc", "stabilize", "--samples", "2000", "--out", dir.path().to_str().unwrap()]).unwrap();
    run(&inv.config).unwrap();
    let s = read_csv(&dir.path().join("stabilize_summary.csv"));
    let (p, th): (f64, f64) = (s[0][0].parse().unwrap(), s[0][1].parse().unwrap());
    assert!((p - 0.115).abs() <= 0.02 && (th - 0.715).abs() <= 0.02, "({p}, {th})");
    assert_eq!(read_csv(&dir.path().join("stabilize_surface.csv")).len(), 2500);
    let mc = read_csv(&dir.path().join("stabilize_mc.csv"));
    assert_eq!(mc.len(), 3);
}

#[test]
fn floats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inv = parse_args(["qfc", "bellpurify", "--steps", "3", "--x", "0.3", "--out", dir.path().to_str().unwrap()]).unwrap();
    run(&inv.config).unwrap();
    let text = std::fs::read_to_string(dir.path().join("bellpurify.csv")).unwrap();
    assert!(text.contains("# x=2.9999999999999999e-1\n"), "{text}");
    for row in read_csv(&dir.path().join("bellpurify.csv")) {
        let x: f64 = row[1].parse().unwrap();
        assert_eq!(qfc_cli::output::fmt_real(x), row[1]);
    }
}

#[test]
fn julia_writes_pgm_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = qfc(&["julia", "--grid", "40x30", "--max-iters", "30", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let pgm = std::fs::read_to_string(dir.path().join("julia.pgm")).unwrap();
    let mut lines = pgm.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("P2"));
    assert_eq!(lines.next(), Some("40 30"));
    assert_eq!(lines.next(), Some("255"));
    let values: Vec<u32> = lines.flat_map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect::<Vec<_>>()).collect();
    assert_eq!(values.len(), 1200);
    assert!(values.iter().all(|&v| v <= 255));
    assert!(pgm.lines().all(|l| l.len() <= 70));
    let rows = read_csv(&dir.path().join("julia.csv"));
    assert_eq!(rows.len(), 1200);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), -2.0);
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 2.0);
}

#[test]
fn outputs_stay_inside_out_path() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("nested").join("dir");
    let status = qfc(&["sme-run", "--trajectories", "20", "--steps", "40", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let top: Vec<_> = std::fs::read_dir(root.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(top, vec![std::ffi::OsString::from("nested")]);
    assert!(out.join("sme_run.csv").exists());
}

#[test]
fn same_seed_same_bytes_different_seed_different_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let args = |o: &Path, seed: &str| {
        vec!["spin-collapse".to_string(), "--trajectories".into(), "16".into(), "--steps".into(), "300".into(), "--seed".into(), seed.into(), "--out".into(), o.to_str().unwrap().to_string()]
    };
    for (name, seed) in [("a", "4"), ("b", "4"), ("c", "5")] {
        let a: Vec<String> = args(&p(name), seed);
        assert!(Command::new(env!("CARGO_BIN_EXE_qfc")).args(&a).env("QFC_THREADS", "3").status().unwrap().success());
    }
    let read = |n: &str| std::fs::read(p(n).join("spin_collapse.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn spin_collapse_summary_has_every_level() {
    let dir = tempfile::tempdir().unwrap();
    let inv = parse_args(["qfc", "spin-collapse", "--two-j", "3", "--trajectories", "12", "--steps", "200", "--out", dir.path().to_str().unwrap()]).unwrap();
    run(&inv.config).unwrap();
    let rows = read_csv(&dir.path().join("spin_collapse_summary.csv"));
    assert_eq!(rows.len(), 4);
    let total: f64 = rows.iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn purify_and_entangle_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let inv = parse_args(["qfc", "purify", "--trajectories", "100", "--dt", "5e-4", "--horizon", "0.5", "--checkpoints", "5", "--out", d]).unwrap();
    run(&inv.config).unwrap();
    assert_eq!(read_csv(&dir.path().join("purify_ensemble.csv")).len(), 5);
    let sp = read_csv(&dir.path().join("purify_speedup.csv"));
    let ratio: f64 = sp[0][3].parse().unwrap();
    assert!(ratio > 0.5 && ratio < 1.0);

    let inv = parse_args(["qfc", "entangle", "--runs", "4", "--out", d]).unwrap();
    run(&inv.config).unwrap();
    let runs = read_csv(&dir.path().join("entangle_runs.csv"));
    assert_eq!(runs.len(), 4);
    assert!(runs.iter().all(|r| r[1] == "ok"));
}
