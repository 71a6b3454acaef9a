//! Behavior tests against the compiled `ringsync` binary: exit codes, output
//! formats, config-file precedence, and byte-level reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ringsync"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout should be UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr should be UTF-8")
}

#[test]
fn help_version_and_bad_flags_use_the_right_exit_codes() {
    let dir = TempDir::new().unwrap();
    for args in [&["--help"][..], &["--version"], &["sweep", "--help"]] {
        let out = run_in(dir.path(), args);
        assert_eq!(out.status.code(), Some(0), "{args:?} should exit 0");
    }
    let out = run_in(dir.path(), &["generate", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(1), "unknown flag is a usage error");
    let out = run_in(dir.path(), &["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn every_flag_documents_its_default() {
    let dir = TempDir::new().unwrap();
    for sub in ["generate", "simulate", "sweep"] {
        let help = stdout(&run_in(dir.path(), &[sub, "--help"]));
        for flag in ["--n", "--k", "--seed"] {
            assert!(help.contains(flag), "{sub} --help lists {flag}");
        }
        assert!(
            help.matches("default").count() >= 4,
            "{sub} --help states defaults"
        );
    }
    let help = stdout(&run_in(dir.path(), &["sweep", "--help"]));
    for needle in ["1000", "w_e=32", "w_i=22", "t_e=3", "t_i=11", "2000", "25"] {
        assert!(help.contains(needle), "sweep --help documents {needle}");
    }
}

#[test]
fn generate_reports_the_network_and_writes_the_edge_list() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "generate", "--n", "1000", "--k", "10", "--p", "0.02", "--seed", "7",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "N=1000 k=10 p=0.02 edges=10000");
    let text = fs::read_to_string(dir.path().join("network.txt")).unwrap();
    assert_eq!(
        text.lines().count(),
        10_001,
        "header plus one line per edge"
    );
    assert!(text.starts_with("1000 10 0.02 7\n"));
}

#[test]
fn generate_rejects_out_of_range_probability() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["generate", "--p", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("rewiring probability"));
}

#[test]
fn metrics_matches_the_ring_lattice_closed_forms() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &["generate", "--n", "1000", "--k", "10", "--p", "0"],
    );
    assert_eq!(out.status.code(), Some(0));
    let out = run_in(dir.path(), &["metrics", "network.txt"]);
    assert_eq!(out.status.code(), Some(0));
    let line = stdout(&out);
    let (c, l) = parse_metrics(&line);
    assert!((c - 2.0 / 3.0).abs() < 1e-9, "C={c}");
    assert!((l - 50400.0 / 999.0).abs() < 1e-9, "L={l}");
}

#[test]
fn metrics_on_a_complete_graph_gives_ones() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("5 4 0 0\n");
    for i in 0..5u32 {
        for j in 0..5u32 {
            if i != j {
                let d = (i.abs_diff(j)).min(5 - i.abs_diff(j));
                text.push_str(&format!("{i} {j} 1.0 {d}\n"));
            }
        }
    }
    fs::write(dir.path().join("k5.txt"), text).unwrap();
    let out = run_in(dir.path(), &["metrics", "k5.txt"]);
    assert_eq!(out.status.code(), Some(0));
    let (c, l) = parse_metrics(&stdout(&out));
    assert_eq!(c, 1.0);
    assert_eq!(l, 1.0);
}

fn parse_metrics(line: &str) -> (f64, f64) {
    let line = line.trim();
    let rest = line.strip_prefix("C=").expect("line starts with C=");
    let (c, rest) = rest.split_once(" L=").expect("line contains L=");
    (c.parse().unwrap(), rest.parse().unwrap())
}

#[test]
fn missing_and_malformed_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["metrics", "nowhere.txt"]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(dir.path().join("broken.txt"), "10 4 0 0\n3 5 1.0\n").unwrap();
    let out = run_in(dir.path(), &["metrics", "broken.txt"]);
    assert_eq!(out.status.code(), Some(2), "truncated edge line");
    assert!(stderr(&out).contains("line 2"), "stderr: {}", stderr(&out));

    let out = run_in(dir.path(), &["analyze", "nowhere.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergent_dynamics_exit_3() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("boom.toml"),
        "w_i = 1.0e12\nduration = 200\n",
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate",
            "--config",
            "boom.toml",
            "--p",
            "0.02",
            "--seed",
            "1",
            "--n",
            "200",
        ],
    );
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("diverged"));
}

#[test]
fn simulate_then_analyze_reports_synchrony() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate",
            "--p",
            "0.02",
            "--seed",
            "1",
            "--duration",
            "2000",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let out = run_in(dir.path(), &["analyze", "--out", "series.txt"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let line = stdout(&out);
    let line = line.trim();
    let rest = line.strip_prefix("S=").expect("S= prefix");
    let (s, rest) = rest.split_once(" freq=").expect("freq field");
    let s: f64 = s.parse().unwrap();
    let freq: f64 = rest.strip_suffix("Hz").unwrap().parse().unwrap();
    assert!(s > 1e10, "synchronized regime, got S={s}");
    assert!((3.0..=20.0).contains(&freq), "freq={freq}");

    let series = fs::read_to_string(dir.path().join("series.txt")).unwrap();
    assert_eq!(
        series.lines().count(),
        2001,
        "header plus one smoothed value per tick"
    );
}

#[test]
fn config_file_feeds_defaults_and_flags_override_it() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "n = 100\nk = 4\nseed = 5\nduration = 300\np = 0.1\nout = \"from_file.txt\"\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["simulate", "--config", "run.toml"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(
        dir.path().join("from_file.txt").exists(),
        "config `out` is honored"
    );
    let header = fs::read_to_string(dir.path().join("from_file.txt")).unwrap();
    assert!(header.starts_with("100 300 5 0.1 false\n"));

    // A flag beats the file: different seed, explicit output path.
    let out = run_in(
        dir.path(),
        &[
            "simulate",
            "--config",
            "run.toml",
            "--seed",
            "6",
            "--out",
            "flagged.txt",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let header = fs::read_to_string(dir.path().join("flagged.txt")).unwrap();
    assert!(header.starts_with("100 300 6 0.1 false\n"));
}

#[test]
fn bad_config_files_are_rejected() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["simulate", "--config", "absent.toml"]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "missing config file is an I/O error"
    );

    fs::write(dir.path().join("typo.toml"), "durration = 100\n").unwrap();
    let out = run_in(dir.path(), &["simulate", "--config", "typo.toml"]);
    assert_eq!(out.status.code(), Some(1), "unknown key is a config error");
    assert!(stderr(&out).contains("durration"));
}

#[test]
fn collapsed_delays_write_the_same_raster_file() {
    let dir = TempDir::new().unwrap();
    let common = [
        "--p",
        "0.02",
        "--seed",
        "3",
        "--duration",
        "400",
        "--n",
        "300",
    ];
    let mut args = vec!["simulate"];
    args.extend_from_slice(&common);
    args.extend_from_slice(&["--out", "plain.txt"]);
    assert_eq!(run_in(dir.path(), &args).status.code(), Some(0));

    let mut args = vec!["simulate"];
    args.extend_from_slice(&common);
    args.extend_from_slice(&[
        "--delay",
        "--distance-scale",
        "1000",
        "--out",
        "collapsed.txt",
    ]);
    assert_eq!(run_in(dir.path(), &args).status.code(), Some(0));

    let a = fs::read(dir.path().join("plain.txt")).unwrap();
    let b = fs::read(dir.path().join("collapsed.txt")).unwrap();
    assert_eq!(
        a, b,
        "all delays collapse to zero, so the files match byte for byte"
    );
}

#[test]
fn sweep_single_point_normalizes_to_itself() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "sweep",
            "--sims",
            "1",
            "--p-grid",
            "0",
            "--duration",
            "400",
            "--n",
            "200",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p,C,L,S,C_norm,L_norm,S_norm,freq_hz,n_sims,seed,C_std,L_std,S_std"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "0");
    assert_eq!(row[4], "1", "C_norm");
    assert_eq!(row[5], "1", "L_norm");
    assert!(lines.next().is_none(), "exactly one row");
    assert!(dir.path().join("sweep.meta.json").exists());
}

#[test]
fn sweep_json_format_holds_rows_and_metadata() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("fmt.toml"), "format = \"json\"\n").unwrap();
    let out = run_in(
        dir.path(),
        &[
            "sweep",
            "--config",
            "fmt.toml",
            "--sims",
            "2",
            "--p-grid",
            "0,0.5",
            "--duration",
            "300",
            "--n",
            "120",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
    assert_eq!(doc["config"]["sims_per_p"], 2);
    assert!(doc["config_hash"].is_string());
    assert_eq!(doc["derived_seeds"].as_array().unwrap().len(), 2);
}

#[test]
fn worker_env_var_is_validated() {
    let dir = TempDir::new().unwrap();
    let out = bin()
        .args(["generate", "--n", "50", "--k", "4"])
        .env("RINGSYNC_WORKERS", "0")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin()
        .args(["generate", "--n", "50", "--k", "4"])
        .env("RINGSYNC_WORKERS", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
}
