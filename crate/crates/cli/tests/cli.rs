use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use amhd_core::galerkin::checkpoint::{load_checkpoint, save_checkpoint};
use amhd_core::galerkin::trace::TraceArchive;
use amhd_core::{MhdState, ModeSet, SpectralField};
use num_complex::Complex;
use serde_json::Value;
use tempfile::TempDir;

fn amhd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amhd"))
        .args(args)
        .output()
        .expect("amhd runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/singlemode.json")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes `fixture` with `edit` applied to its JSON.
fn config_with(dir: &Path, name: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(fixture()).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

fn run_fixture(tmp: &TempDir) -> PathBuf {
    let out = tmp.path().join("run");
    let o = amhd(&["run", p(&fixture()), "--out", p(&out), "--verbosity", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn fixture_energy_follows_closed_form() {
    let tmp = TempDir::new().unwrap();
    let out = run_fixture(&tmp);
    let tr = TraceArchive::load(&out).unwrap();
    assert_eq!(tr.manifest.status, "complete");
    assert_eq!(tr.len(), 11);
    // E = 1/2 (|V|^2 + |B|^2) with amplitude-1 cosines and nu = eta
    for (t, e) in tr.times().iter().zip(tr.column("energy").unwrap()) {
        let want = 0.5 * (-0.2 * t).exp();
        assert!((e - want).abs() <= 1e-10 * want, "t={t}: {e} vs {want}");
    }
    let m: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["resolved"]["delta_auto"], true);
    assert_eq!(m["resolved"]["sigma"], 0.05);
    let d = m["resolved"]["delta"].as_f64().unwrap();
    let dmax = m["resolved"]["delta_max"].as_f64().unwrap();
    assert!((d - 0.9 * dmax).abs() <= 1e-15 * dmax);
    assert_eq!(m["delta"].as_f64().unwrap(), d);
}

#[test]
fn zero_horizon_gives_one_sample() {
    let tmp = TempDir::new().unwrap();
    let cfg = config_with(tmp.path(), "c.json", |v| v["t_end"] = 0.0.into());
    let out = tmp.path().join("run");
    let o = amhd(&["run", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(TraceArchive::load(&out).unwrap().len(), 1);
}

#[test]
fn bad_s_grid_names_the_field() {
    let tmp = TempDir::new().unwrap();
    let cfg = config_with(tmp.path(), "c.json", |v| v["s_grid"] = "abc".into());
    let o = amhd(&["run", p(&cfg), "--out", p(&tmp.path().join("run"))]);
    assert_eq!(code(&o), 1);
    let e = stderr(&o);
    assert!(e.contains("s_grid") && e.contains("line"), "{e}");
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = config_with(tmp.path(), "c.json", |v| v["viscosity"] = 0.1.into());
    let o = amhd(&["run", p(&cfg), "--out", p(&tmp.path().join("run"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("viscosity"), "{}", stderr(&o));

    let cfg = config_with(tmp.path(), "d.json", |v| v["initial"]["amp"] = 1.0.into());
    let o = amhd(&["run", p(&cfg), "--out", p(&tmp.path().join("run"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("initial"), "{}", stderr(&o));
}

#[test]
fn delta_must_be_number_or_auto() {
    let tmp = TempDir::new().unwrap();
    let cfg = config_with(tmp.path(), "c.json", |v| v["delta"] = "big".into());
    let o = amhd(&["run", p(&cfg), "--out", p(&tmp.path().join("run"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("delta"), "{}", stderr(&o));
    let cfg = config_with(tmp.path(), "d.json", |v| v["delta"] = 0.01.into());
    let out = tmp.path().join("run2");
    assert_eq!(code(&amhd(&["run", p(&cfg), "--out", p(&out), "--verbosity", "0"])), 0);
    assert_eq!(TraceArchive::load(&out).unwrap().manifest.delta, Some(0.01));
}

#[test]
fn output_directory_is_required() {
    let o = amhd(&["run", p(&fixture())]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("output"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&amhd(&["frobnicate"])), 1);
    assert_eq!(code(&amhd(&["--help"])), 0);
}

#[test]
fn verify_fixture_passes() {
    let tmp = TempDir::new().unwrap();
    let out = run_fixture(&tmp);
    let o = amhd(&["verify", p(&out)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify/report.json")).unwrap()).unwrap();
    let reports = rep["reports"].as_array().unwrap();
    let ids: Vec<&str> = reports.iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["B29", "B32_1", "B36_1"]);
    for r in reports {
        assert_eq!(r["verdict"], "pass");
        assert!(r["ratio"].as_f64().unwrap() < 1.0);
    }
    let csv = std::fs::read_to_string(out.join("verify/bound_series.csv")).unwrap();
    assert!(csv.starts_with("bound,s,t,value\n"));
}

#[test]
fn verify_zero_archive_is_vacuous() {
    let tmp = TempDir::new().unwrap();
    let cfg = config_with(tmp.path(), "c.json", |v| {
        v["initial"]["v_amp"] = serde_json::json!([0.0, 0.0, 0.0]);
        v["initial"]["b_amp"] = serde_json::json!([0.0, 0.0, 0.0]);
        v["bounds"] = serde_json::json!([]);
        v["t_end"] = 0.1.into();
    });
    let out = tmp.path().join("run");
    assert_eq!(code(&amhd(&["run", p(&cfg), "--out", p(&out), "--verbosity", "0"])), 0);
    let rep_dir = tmp.path().join("rep");
    let o = amhd(&["verify", p(&out), "--out", p(&rep_dir)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(rep_dir.join("report.json")).unwrap()).unwrap();
    let reports = rep["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 15);
    assert!(reports.iter().all(|r| r["verdict"] == "vacuous"));
}

#[test]
fn corrupted_trace_fails() {
    let tmp = TempDir::new().unwrap();
    let out = run_fixture(&tmp);
    let tr = TraceArchive::load(&out).unwrap();
    for s in tr.manifest.samples.iter().skip(1) {
        let path = out.join(s.checkpoint.as_ref().unwrap());
        let st = load_checkpoint(&path).unwrap();
        let bad = MhdState::new(st.v.scaled(10.0), st.b.scaled(10.0), st.t, st.nu, st.eta).unwrap();
        save_checkpoint(&path, &bad).unwrap();
    }
    let o = amhd(&["verify", p(&out), "--bounds", "B29,B32_2,B36_1", "--s", "0,1"]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
    assert!(stdout(&o).contains("fail"));
}

#[test]
fn unknown_bound_lists_valid_ids() {
    let tmp = TempDir::new().unwrap();
    let out = run_fixture(&tmp);
    let o = amhd(&["verify", p(&out), "--bounds", "B99"]);
    assert_eq!(code(&o), 1);
    let e = stderr(&o);
    assert!(e.contains("B99") && e.contains("B32_1") && e.contains("P52"), "{e}");
    let o = amhd(&["verify", p(&out), "--bounds", "P52:-1"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("P52"));
}

#[test]
fn verify_accepts_negative_indices() {
    let tmp = TempDir::new().unwrap();
    let out = run_fixture(&tmp);
    let o = amhd(&["verify", p(&out), "--bounds", "P52,B36_3", "--s", "-4,-5", "--verbosity", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify/report.json")).unwrap()).unwrap();
    assert_eq!(rep["reports"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_rejects_missing_archive() {
    let tmp = TempDir::new().unwrap();
    let o = amhd(&["verify", p(&tmp.path().join("nothing"))]);
    assert_eq!(code(&o), 1);
}

#[test]
fn constants_lattice_and_sup() {
    let o = amhd(&["constants", "--lattice", "0:2", "--sup", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c = &t["entries"]["C_0,2"];
    let v = c["value"].as_f64().unwrap();
    // p = 0, a = 2: 4 pi e^{sqrt 3} a^{-3} Gamma(3) = pi e^{sqrt 3}
    let closed = (std::f64::consts::PI * 3f64.sqrt().exp()).sqrt();
    assert!((v - closed).abs() <= 1e-12 * closed);
    // and it dominates the lattice sum it bounds, at Phi = 1
    let mut sum = 0.0;
    for a in -30i32..=30 {
        for b in -30i32..=30 {
            for d in -30i32..=30 {
                if (a, b, d) != (0, 0, 0) {
                    sum += (-2.0 * ((a * a + b * b + d * d) as f64).sqrt()).exp();
                }
            }
        }
    }
    assert!(sum <= v * v);
    assert!((v - 4.214).abs() < 5e-4);
    assert_eq!(c["provenance"], "exact");
    assert_eq!(t["entries"]["c_2"]["provenance"], "certified-upper");
}

#[test]
fn constants_are_deterministic_per_seed() {
    let args = ["constants", "--s", "1", "--trials", "6", "--seed", "7"];
    let a = amhd(&args);
    let b = amhd(&args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    let t: Value = serde_json::from_str(&stdout(&a)).unwrap();
    let e = &t["entries"]["C_1"];
    assert_eq!(e["provenance"], "estimated");
    assert_eq!(e["value"].as_f64().unwrap(), 2.0 * e["raw"].as_f64().unwrap());
}

#[test]
fn constants_reject_out_of_domain() {
    assert_eq!(code(&amhd(&["constants", "--s", "1.5"])), 1);
    assert_eq!(code(&amhd(&["constants", "--sup", "1"])), 1);
    assert_eq!(code(&amhd(&["constants", "--lattice", "0"])), 1);
}

#[test]
fn spectrum_of_constructed_decay() {
    let tmp = TempDir::new().unwrap();
    // |c(n)| = e^{-|n|/2}, perpendicular to n
    let w = SpectralField::from_fn(ModeSet::shared(32), |n| {
        let [a, b, c] = n.0.map(|x| x as f64);
        let u = if a == 0.0 && b == 0.0 { [0.0, c, -b] } else { [b, -a, 0.0] };
        let m = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        let amp = (-0.5 * n.norm()).exp() / m;
        u.map(|x| Complex::new(amp * x, 0.0))
    });
    let st = MhdState::new(w.clone(), w, 0.0, 0.1, 0.1).unwrap();
    let ck = tmp.path().join("w.mhdg");
    save_checkpoint(&ck, &st).unwrap();
    let o = amhd(&["spectrum", p(&ck), "--delta", "0.01"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("field,sigma_fit,m_lo,m_hi,residual,lower_bound"));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let sigma: f64 = f[1].parse().unwrap();
        assert!((sigma - 0.5).abs() <= 0.01, "{line}");
        assert_eq!((f[2], f[3]), ("8", "24"));
        assert!(f[5].parse::<f64>().unwrap() > 0.0);
    }
    let o = amhd(&["spectrum", p(&tmp.path().join("missing.mhdg"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("missing.mhdg"));
}

fn random_config(dir: &Path) -> PathBuf {
    config_with(dir, "r.json", |v| {
        v["initial"] = serde_json::json!({"kind": "random-spectrum", "seed": 3});
        v["t_end"] = 0.05.into();
        v["bounds"] = serde_json::json!([]);
    })
}

#[test]
fn compare_identical_truncations_is_zero() {
    let tmp = TempDir::new().unwrap();
    let o = amhd(&["compare", p(&random_config(tmp.path())), "--n", "6,6", "--verbosity", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t,psi_6_6"));
    let rows: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|&x| x == 0.0));
}

#[test]
fn compare_reports_convergence() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("cmp");
    let o = amhd(&["compare", p(&random_config(tmp.path())), "--n", "8,4,16", "--out", p(&dir)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.join("compare.csv")).unwrap();
    assert!(csv.starts_with("t,psi_4_8,psi_8_16\n"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("compare.json")).unwrap()).unwrap();
    assert_eq!(s["n"], serde_json::json!([4, 8, 16]));
    assert_eq!(s["monotone"], true);
}
