use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn singscat(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singscat"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|row| row.unwrap().iter().map(|s| s.parse().unwrap()).collect())
        .collect()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// A cavity small enough to simulate in well under a second.
const SMALL_CAVITY: &str = r#"{"sim": {
    "a": 7.0685834705770345, "dx": 0.02761165418194154, "t_end": 4,
    "record_interval": 0.02, "window": 1, "epsilon": 0.01,
    "spectrum": {"k_min": 1, "k_max": 3, "points": 201}}}"#;

#[test]
fn single_gain_delta_amplitudes_vanish_at_its_strength() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "s.json",
        r#"{"centers": [{"kind": "delta", "position": 0, "strength": [0, 1]}]}"#,
    );
    let o = singscat(
        &[
            "amplitudes",
            "--config",
            cfg.to_str().unwrap(),
            "--k-min",
            "0.5",
            "--k-max",
            "1.5",
            "--k-points",
            "101",
            "--out",
            "a",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&tmp.path().join("a/amplitudes.csv"));
    assert_eq!(rows.len(), 101);
    let (k, m22) = rows
        .iter()
        .map(|r| (r[0], r[9]))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((k - 1.0).abs() < 1e-12 && m22 < 1e-12, "{k} {m22}");
    for r in &rows {
        assert!((r[9] - (1.0 - 1.0 / r[0]).abs()).abs() < 1e-12);
    }
}

#[test]
fn free_space_rows() {
    let tmp = TempDir::new().unwrap();
    let o = singscat(&["amplitudes", "--k-points", "7", "--out", "a"], tmp.path());
    assert_eq!(code(&o), 0);
    for r in read_csv(&tmp.path().join("a/amplitudes.csv")) {
        assert_eq!(&r[1..], &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }
}

#[test]
fn lattice_scene_approaches_continuum_at_small_k_dx() {
    // s·δ(x) against a chain with κ = 1/(2dx²) and on-site s/dx at q = k·dx.
    let tmp = TempDir::new().unwrap();
    let (s, k) = ((0.4, -0.9), 1.3);
    let cont = write(
        tmp.path(),
        "c.json",
        &format!(
            r#"{{"centers": [{{"kind": "delta", "position": 0, "strength": [{}, {}]}}]}}"#,
            s.0, s.1
        ),
    );
    let k_arg = k.to_string();
    let o = singscat(
        &[
            "amplitudes",
            "--config",
            cont.to_str().unwrap(),
            "--k-min",
            &k_arg,
            "--k-max",
            &k_arg,
            "--k-points",
            "1",
            "--out",
            "c",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let reference = read_csv(&tmp.path().join("c/amplitudes.csv")).remove(0);

    let mut errors = Vec::new();
    for dx in [0.04, 0.02, 0.01] {
        let name = format!("l{dx}");
        let cfg = write(
            tmp.path(),
            &format!("{name}.json"),
            &format!(
                r#"{{"model": {{"type": "lattice", "hopping": {}}},
                    "centers": [{{"kind": "site", "position": 0, "strength": [{}, {}]}}]}}"#,
                0.5 / (dx * dx),
                s.0 / dx,
                s.1 / dx
            ),
        );
        let q = (k * dx).to_string();
        let o = singscat(
            &[
                "amplitudes",
                "--config",
                cfg.to_str().unwrap(),
                "--k-min",
                &q,
                "--k-max",
                &q,
                "--k-points",
                "1",
                "--out",
                &name,
            ],
            tmp.path(),
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let row = read_csv(&tmp.path().join(format!("{name}/amplitudes.csv"))).remove(0);
        let err = (1..9)
            .map(|i| (row[i] - reference[i]).abs())
            .fold(0.0, f64::max);
        assert!(err < 2.0 * k * dx, "dx = {dx}: {err}");
        errors.push(err);
    }
    // First order: halving dx roughly halves the error.
    assert!(
        errors[1] < 0.7 * errors[0] && errors[2] < 0.7 * errors[1],
        "{errors:?}"
    );
}

#[test]
fn equal_gain_deltas_have_singularity_at_n_v0() {
    let tmp = TempDir::new().unwrap();
    let v0 = 0.8;
    for n in 1..=3 {
        let k_c = n as f64 * v0;
        let spacing = PI / k_c;
        let centers: Vec<String> = (0..n)
            .map(|j| {
                format!(
                    r#"{{"kind": "delta", "position": {}, "strength": [0, {v0}]}}"#,
                    j as f64 * spacing
                )
            })
            .collect();
        let cfg = write(
            tmp.path(),
            "n.json",
            &format!(
                r#"{{"centers": [{}], "solver": {{"k_min": {}, "k_max": {}}}}}"#,
                centers.join(","),
                0.5 * k_c,
                1.5 * k_c
            ),
        );
        let o = singscat(&["find-ss", "--config", cfg.to_str().unwrap()], tmp.path());
        assert_eq!(code(&o), 0);
        let found: Vec<Value> = serde_json::from_slice(&o.stdout).unwrap();
        assert!(
            found
                .iter()
                .any(|s| (s["k_c"].as_f64().unwrap() - k_c).abs() < 1e-9),
            "n = {n}: {found:?}"
        );
    }
}

#[test]
fn hermitian_scene_has_no_singularities() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "h.json",
        r#"{"centers": [{"kind": "delta", "position": 0, "strength": 1.2},
                        {"kind": "delta", "position": 2.5, "strength": -0.4}]}"#,
    );
    let o = singscat(
        &["find-ss", "--config", cfg.to_str().unwrap(), "--out", "f"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0);
    let found: Vec<Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(found.is_empty());
    assert_eq!(manifest(&tmp.path().join("f"))["derived"]["count"], 0);
}

#[test]
fn designed_lattice_pair_round_trips_through_find_ss() {
    let tmp = TempDir::new().unwrap();
    let o = singscat(
        &[
            "design",
            "lattice-pair",
            "--set",
            "k_c=1.2",
            "--set",
            "a=3",
            "--set",
            "kappa=1.5",
            "--out",
            "d",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = singscat(&["find-ss", "--config", "d/scene.json"], tmp.path());
    assert_eq!(code(&o), 0);
    let found: Vec<Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(found.len(), 1, "{found:?}");
    assert!((found[0]["k_c"].as_f64().unwrap() - 1.2).abs() < 1e-9);
}

#[test]
fn design_rejects_unknown_designers_and_parameters() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(
        code(&singscat(&["design", "ring", "--set", "k_c=1"], tmp.path())),
        2
    );
    let o = singscat(
        &[
            "design", "cavity", "--set", "gamma=1", "--set", "n=2", "--set", "gama=1",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_keys_fail_validation_with_location() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.json",
        "{\n  \"sim\": {\"gamma\": 1, \"dtt\": 0.1}\n}",
    );
    let o = singscat(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sim.dtt") && err.contains("line 2"), "{err}");
}

#[test]
fn two_delta_wave_satisfies_the_equation() {
    let tmp = TempDir::new().unwrap();
    let (v1, v2) = (0.9, 0.3);
    let x2 = 0.5 + 2.0 * PI / (v1 + v2);
    let cfg = write(
        tmp.path(),
        "w.json",
        &format!(
            r#"{{"wave": {{"source": {{"kind": "two-delta", "v1": {v1}, "v2": {v2}, "x1": 0.5, "x2": {x2}}},
                 "x_min": -5, "x_max": 15, "points": 201}}}}"#
        ),
    );
    let o = singscat(
        &["wave", "--config", cfg.to_str().unwrap(), "--out", "w"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&tmp.path().join("w"));
    for key in ["helmholtz", "continuity", "jump"] {
        assert!(m["derived"]["substitution_residual"][key].as_f64().unwrap() < 1e-12);
    }
    let rows = read_csv(&tmp.path().join("w/wave.csv"));
    assert_eq!(rows.len(), 201);
    // Purely outgoing: unit modulus on both sides.
    assert!((rows[0][3] - 1.0).abs() < 1e-12 && (rows[200][3] - 1.0).abs() < 1e-12);
}

#[test]
fn simulation_is_byte_reproducible_from_its_manifest() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", SMALL_CAVITY);
    let first = singscat(
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", "r1"],
        tmp.path(),
    );
    assert_eq!(
        code(&first),
        0,
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let m = manifest(&tmp.path().join("r1"));
    assert!((m["derived"]["peak_k"].as_f64().unwrap() - 2.0).abs() < 0.05);
    assert!(m["derived"]["t_f"].as_f64().is_some());

    let replayed = write(tmp.path(), "m.json", &m["config"].to_string());
    let second = singscat(
        &[
            "simulate",
            "--config",
            replayed.to_str().unwrap(),
            "--out",
            "r2",
        ],
        tmp.path(),
    );
    assert_eq!(code(&second), 0);
    for f in [
        "trace.csv",
        "spectrum.csv",
        "checkpoint.csv",
        "manifest.json",
    ] {
        assert_eq!(
            fs::read(tmp.path().join("r1").join(f)).unwrap(),
            fs::read(tmp.path().join("r2").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn hermitian_run_keeps_a_flat_norm() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "h.json",
        r#"{"sim": {"gamma": 0, "k_c": 2, "a": 7.0685834705770345, "dx": 0.02761165418194154,
                    "t_end": 1, "record_interval": 0.05, "window": 0.5, "epsilon": 0.5}}"#,
    );
    let o = singscat(
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", "h"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&tmp.path().join("h/trace.csv"));
    let n0 = rows[0][4];
    assert!(rows.iter().all(|r| (r[4] - n0).abs() < 1e-10 * n0));
}

#[test]
fn unsettled_run_exits_4_and_still_writes_outputs() {
    let tmp = TempDir::new().unwrap();
    let strict = write(
        tmp.path(),
        "s.json",
        &SMALL_CAVITY.replace(r#""epsilon": 0.01"#, r#""epsilon": 1e-9"#),
    );
    let o = singscat(
        &[
            "simulate",
            "--config",
            strict.to_str().unwrap(),
            "--out",
            "n",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 4);
    let m = manifest(&tmp.path().join("n"));
    assert!(m["derived"]["t_f"].is_null());
    assert_eq!(m["derived"]["relaxation"]["status"], "not-converged");
    assert!(tmp.path().join("n/trace.csv").exists());
}

#[test]
fn refinement_records_convergence_deltas() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", SMALL_CAVITY);
    let o = singscat(
        &[
            "simulate",
            "--refine",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            "r",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = &manifest(&tmp.path().join("r"))["derived"]["refinement"];
    assert!(r["delta_peak_k"].as_f64().unwrap().abs() < 0.01, "{r}");
    assert!(r["max_delta_abs_fidelity"].as_f64().unwrap() < 0.05, "{r}");
}

#[test]
fn spectrum_reads_back_a_checkpoint() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", SMALL_CAVITY);
    let c = cfg.to_str().unwrap();
    assert_eq!(
        code(&singscat(
            &["simulate", "--config", c, "--out", "s"],
            tmp.path()
        )),
        0
    );
    let o = singscat(
        &[
            "spectrum",
            "--config",
            c,
            "--checkpoint",
            "s/checkpoint.csv",
            "--k-points",
            "51",
            "--out",
            "p",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&tmp.path().join("p"));
    let t = m["derived"]["t"].as_f64().unwrap();
    assert!((t - 4.0).abs() < 1e-3, "{t}");
    assert_eq!(read_csv(&tmp.path().join("p/spectrum.csv")).len(), 51);

    // A checkpoint from a different grid is refused.
    let o = singscat(
        &[
            "spectrum",
            "--config",
            c,
            "--checkpoint",
            "s/checkpoint.csv",
            "--dx",
            "0.02",
            "--out",
            "q",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn config_lists_run_as_separate_jobs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "sweep.json",
        r#"[{"centers": [{"kind": "delta", "position": 0, "strength": [0, 1]}]},
            {"centers": [{"kind": "delta", "position": 0, "strength": [0, 2]}]}]"#,
    );
    let o = singscat(
        &[
            "amplitudes",
            "--config",
            cfg.to_str().unwrap(),
            "--k-points",
            "11",
            "--jobs",
            "2",
            "--out",
            "sw",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0);
    for run in ["run-000", "run-001"] {
        assert_eq!(
            read_csv(&tmp.path().join("sw").join(run).join("amplitudes.csv")).len(),
            11
        );
    }
}
