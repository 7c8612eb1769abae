use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn qvolume(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qvolume"))
        .args(args)
        .env_remove("QVOLUME_SEED")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn without_wall_clock(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_seconds");
    v
}

fn golden(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn scratch_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qvolume-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const HITRUN_GOLDEN: [&str; 14] = [
    "ratio", "--family", "x_states", "--samples", "2e5", "--block-size", "2e4", "--seed", "42",
    "--chains", "2", "--predicate", "chsh", "--format",
];

#[test]
fn hitrun_run_matches_golden_file() {
    let mut args = HITRUN_GOLDEN.to_vec();
    args.push("json");
    let v = without_wall_clock(json(&qvolume(&args)));
    assert_eq!(v, golden("ratio_x_states_chsh.json"));
}

#[test]
fn multiphase_run_matches_golden_file() {
    let out = qvolume(&[
        "ratio", "--family", "bell_diagonal", "--sampler", "multiphase", "--samples", "1e4", "--reps", "3",
        "--seed", "42", "--chains", "1",
    ]);
    let v = without_wall_clock(json(&out));
    assert_eq!(v, golden("ratio_bell_multiphase.json"));
    assert_eq!(v["per_phase"].as_array().unwrap().len(), 4);
}

#[test]
fn repeated_runs_are_byte_identical_apart_from_wall_clock() {
    let args = [
        "ratio", "--family", "rebit_rebit", "--samples", "1e5", "--seed", "7", "--chains", "3",
    ];
    let strip = |out: Output| -> String {
        assert!(out.status.success());
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .filter(|l| !l.contains("wall_seconds"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(qvolume(&args)), strip(qvolume(&args)));
}

#[test]
fn bell_diagonal_benchmark_is_one_half() {
    let v = json(&qvolume(&[
        "ratio", "--family", "bell_diagonal", "--sampler", "hitrun", "--samples", "1e7", "--seed", "42",
    ]));
    let mean = v["ratio_mean"].as_f64().unwrap();
    let sigma = v["ratio_sigma"].as_f64().unwrap();
    assert!((mean - 0.5).abs() <= (3.0 * sigma).max(0.003), "{v}");
    assert_eq!(v["samples"], 10_000_000);
    assert_eq!(v["blocks"], 10);
}

#[test]
fn family_without_entanglement_gives_exactly_one() {
    let v = json(&qvolume(&["ratio", "--family", "qbqt_i", "--sampler", "hitrun", "--samples", "1e6"]));
    assert_eq!(v["ratio_mean"].as_f64(), Some(1.0));
    assert_eq!(v["ratio_sigma"].as_f64(), Some(0.0));
}

#[test]
fn csv_output_has_header_and_one_row() {
    let mut args = HITRUN_GOLDEN.to_vec();
    args.push("csv");
    let out = qvolume(&args);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("schema_version,family,sampler,predicate,samples"));
    assert!(lines[1].starts_with("1,x_states,hitrun,chsh,200000,10,"));
}

#[test]
fn exit_codes() {
    assert_eq!(qvolume(&["ratio", "--family", "nope"]).status.code(), Some(1));
    assert_eq!(qvolume(&["ratio"]).status.code(), Some(1));
    assert_eq!(qvolume(&["ratio", "--family", "x_states", "--samples", "1.5"]).status.code(), Some(1));
    assert_eq!(qvolume(&["ratio", "--bogus-flag"]).status.code(), Some(1));
    assert_eq!(
        qvolume(&["ratio", "--family", "qubit_qutrit", "--predicate", "chsh", "--samples", "1e3"]).status.code(),
        Some(1)
    );
    // the outer phases of a 15-dimensional family never see a state at this size
    let starved = qvolume(&[
        "ratio", "--family", "two_qubit", "--sampler", "multiphase", "--samples", "20", "--reps", "2",
    ]);
    assert_eq!(starved.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&starved.stderr).contains("insufficient statistics"));
    assert_eq!(qvolume(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_is_overridden_by_flags_and_env_seed_is_a_fallback() {
    let cfg = scratch_file(
        "run.conf",
        "# a run\nfamily = x_states\nsamples=1e5\nblock_size = 1e4\nseed = 5\nchains = 1\n",
    );
    let cfg = cfg.to_str().unwrap();
    let from_file = json(&qvolume(&["ratio", "--config", cfg]));
    assert_eq!((from_file["family"].as_str(), from_file["seed"].as_u64()), (Some("x_states"), Some(5)));
    assert_eq!(from_file["samples"], 100_000);
    let flagged = json(&qvolume(&["ratio", "--config", cfg, "--seed", "6", "--family", "rebit_rebit"]));
    assert_eq!((flagged["family"].as_str(), flagged["seed"].as_u64()), (Some("rebit_rebit"), Some(6)));

    let env_run = Command::new(env!("CARGO_BIN_EXE_qvolume"))
        .args(["ratio", "--family", "x_states", "--samples", "1e4"])
        .env("QVOLUME_SEED", "77")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert_eq!(json(&env_run)["seed"], 77);

    let bad = scratch_file("bad.conf", "colour = blue\n");
    assert_eq!(qvolume(&["ratio", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn out_flag_writes_the_file() {
    let path = std::env::temp_dir().join(format!("qvolume-cli-out-{}.json", std::process::id()));
    let out = qvolume(&[
        "bell", "--family", "bell_diagonal", "--predicate", "cg-body", "--samples", "1e5", "--chains", "1",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["predicate"], "cg-body");
    assert_eq!(v["config"]["sampler"], "hitrun");
    let r = v["ratio_mean"].as_f64().unwrap();
    assert!(r > 0.02 && r < 0.06, "{v}");
    std::fs::remove_file(path).unwrap();
}

fn pipe(args: &[&str], stdin: &str) -> Value {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qvolume"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    json(&child.wait_with_output().unwrap())
}

const BELL_STATE: &str = "4\n\
    0.5+0j 0+0j 0+0j 0.5+0j\n\
    0+0j 0+0j 0+0j 0+0j\n\
    0+0j 0+0j 0+0j 0+0j\n\
    0.5+0j 0+0j 0+0j 0.5+0j\n";

#[test]
fn matrix_checks() {
    let psd = pipe(&["check-psd"], BELL_STATE);
    assert_eq!(psd["psd"], true);
    assert_eq!(psd["newton_coefficients"].as_array().unwrap().len(), 5);

    let ppt = pipe(&["ppt-check", "--na", "2", "--nb", "2"], BELL_STATE);
    assert_eq!((ppt["state"].as_bool(), ppt["ppt"].as_bool()), (Some(true), Some(false)));

    let mixed = scratch_file("mixed.txt", "2\n0.5+0j 0+0j\n0+0j 0.5+0j\n");
    assert_eq!(json(&qvolume(&["check-psd", mixed.to_str().unwrap()]))["psd"], true);
    let negative = scratch_file("negative.txt", "2\n1.5+0j 0+0j\n0+0j -0.5+0j\n");
    assert_eq!(json(&qvolume(&["check-psd", negative.to_str().unwrap()]))["psd"], false);
    let garbage = scratch_file("garbage.txt", "2\n1 2\n");
    assert_eq!(qvolume(&["check-psd", garbage.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(qvolume(&["ppt-check", "--na", "3", "--nb", "2", mixed.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn basis_dump_lists_generators() {
    let v = json(&qvolume(&["basis-dump", "--family", "qubit_qutrit"]));
    assert_eq!((v["n"].as_u64(), v["d"].as_u64()), (Some(6), Some(35)));
    assert_eq!(v["generators"].as_array().unwrap().len(), 35);
    let first = v["generators"][0].as_str().unwrap();
    assert_eq!(first.lines().next(), Some("6"));
}

#[test]
fn scan_curve_union_dominates_its_parts() {
    let out = qvolume(&[
        "scan-curve", "--family", "two_qubit", "--samples", "3000", "--scan-settings", "200", "--format", "csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,R_CG,R_CHSH,R_CG+CHSH"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.iter().map(|r| r[0] as usize).collect::<Vec<_>>(), [1, 2, 4, 8, 16, 32, 64, 128, 200]);
    for w in rows.windows(2) {
        assert!(w[0][1..].iter().zip(&w[1][1..]).all(|(a, b)| b >= a), "prefix scans are nested");
    }
    for r in &rows {
        assert!(r[3] >= r[1].max(r[2]));
    }
    assert_eq!(
        qvolume(&["scan-curve", "--family", "x_states", "--samples", "10"]).status.code(),
        Some(1)
    );
}
