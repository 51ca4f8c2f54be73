use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use stargen::io;
use stargen::special::hermite_function;
use stargen::{HbarContext, PhaseField, PhaseGrid, C64};

fn stargen(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stargen")).args(args).current_dir(dir).output().expect("run stargen")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn oscillator_default_run() {
    let d = tempfile::tempdir().unwrap();
    let o = stargen(&["oscillator", "--out", "run", "--window", "0", "--window", "2"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&d.path().join("run/eigenvalues.json"));
    let ev = v["eigenvalues"].as_array().unwrap();
    assert_eq!(ev.len(), 8);
    for (k, e) in ev.iter().enumerate() {
        assert!((e.as_f64().unwrap() - (k as f64 + 0.5)).abs() < 1e-8);
    }
    assert_eq!(v["hamiltonian"]["kind"], "quadratic_1d");
    let csv = fs::read_to_string(d.path().join("run/residuals.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("j,k_window,lambda,residual"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 16);
    for r in rows {
        let res: f64 = r.split(',').nth(3).unwrap().parse().unwrap();
        assert!(res < 1e-6, "{r}");
    }
    let (psi, _) = io::read_wave(&d.path().join("run/psi_3.sgf")).unwrap();
    assert!((psi.norm() - 1.0).abs() < 1e-10);
    let sg = io::read_phase(&d.path().join("run/stargen_3_w2.sgf")).unwrap();
    assert!((sg.norm() - 1.0).abs() < 1e-8);
}

#[test]
fn outputs_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = stargen(&["oscillator", "--grid", "-12:12:128", "--count", "4", "--out", out], d.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["eigenvalues.json", "residuals.csv", "psi_2.sgf", "stargen_1_w0.sgf"] {
        assert_eq!(fs::read(d.path().join("a").join(f)).unwrap(), fs::read(d.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn zero_count_and_bad_configs() {
    let d = tempfile::tempdir().unwrap();
    let o = stargen(&["oscillator", "--count", "0", "--out", "z"], d.path());
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(d.path().join("z/residuals.csv")).unwrap(), "j,k_window,lambda,residual\n");
    assert_eq!(json(&d.path().join("z/eigenvalues.json"))["eigenvalues"].as_array().unwrap().len(), 0);

    fs::write(d.path().join("bad.json"), "{ \"count\": ").unwrap();
    let o = stargen(&["oscillator", "--config", "bad.json"], d.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.starts_with("error:") && e.trim_end().lines().count() == 1, "{e}");

    fs::write(d.path().join("typo.json"), "{ \"cuont\": 3 }").unwrap();
    assert_eq!(stargen(&["oscillator", "--config", "typo.json"], d.path()).status.code(), Some(2));
    assert_eq!(stargen(&["oscillator", "--grid", "-1:1"], d.path()).status.code(), Some(2));
    assert_eq!(stargen(&["oscillator", "--grid", "-5:5:64", "--count", "17"], d.path()).status.code(), Some(2));
    assert_eq!(stargen(&["solve"], d.path()).status.code(), Some(2));
}

#[test]
fn solve_quartic_from_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "grid": {"x_min": -6, "x_max": 6, "n_points": 256},
        "hamiltonian": {"kind": "kinetic_potential", "potential": {"type": "polynomial", "coeffs": [0, 0, 0, 0, 1]}},
        "count": 3,
        "output_dir": "quartic"
    }"#;
    fs::write(d.path().join("q.json"), cfg).unwrap();
    let o = stargen(&["solve", "--config", "q.json"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&d.path().join("quartic/eigenvalues.json"));
    let e0 = v["eigenvalues"][0].as_f64().unwrap();
    assert!((e0 - 0.667_986_259_155_777).abs() < 1e-5, "{e0}");
}

fn phase_files(dir: &Path) -> PhaseGrid {
    let g = PhaseGrid::symmetric(32, HbarContext::new(0.5).unwrap()).unwrap();
    let ones = PhaseField::constant(g, C64::new(1.0, 0.0));
    let bump = PhaseField::from_fn(g, |x, p| C64::from_polar((-(x * x + 2.0 * p * p)).exp(), 0.3 * x));
    io::write_phase(&dir.join("ones.sgf"), &ones).unwrap();
    io::write_phase(&dir.join("bump.sgf"), &bump).unwrap();
    io::write_phase(&dir.join("x.sgf"), &PhaseField::from_real_fn(g, |x, _| x)).unwrap();
    io::write_phase(&dir.join("p.sgf"), &PhaseField::from_real_fn(g, |_, p| p)).unwrap();
    let other = PhaseGrid::symmetric(16, HbarContext::new(0.5).unwrap()).unwrap();
    io::write_phase(&dir.join("small.sgf"), &PhaseField::constant(other, C64::new(1.0, 0.0))).unwrap();
    g
}

#[test]
fn star_command() {
    let d = tempfile::tempdir().unwrap();
    phase_files(d.path());
    let o = stargen(&["star", "ones.sgf", "bump.sgf", "--out", "ab.sgf"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("norm "));
    let ab = io::read_phase(&d.path().join("ab.sgf")).unwrap();
    let b = io::read_phase(&d.path().join("bump.sgf")).unwrap();
    assert!(ab.max_abs_diff(&b).unwrap() < 1e-12);

    let o = stargen(&["star", "x.sgf", "p.sgf", "--out", "xp.csv", "--verify"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o).lines().find(|l| l.starts_with("commutator")).unwrap().to_string();
    let nums: Vec<f64> = line.split_whitespace().filter_map(|t| t.parse().ok()).collect();
    assert!(nums[0].abs() < 1e-10 && (nums[1] - 0.5).abs() < 1e-10 && nums[2] < 1e-10, "{line}");
    assert!(fs::read_to_string(d.path().join("xp.csv")).unwrap().starts_with("x,p,re,im\n"));

    let o = stargen(&["star", "ones.sgf", "small.sgf", "--out", "bad.sgf"], d.path());
    assert_eq!(o.status.code(), Some(3));
    let o = stargen(&["star", "ones.sgf", "missing.sgf", "--out", "bad.sgf"], d.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn wigner_command() {
    let d = tempfile::tempdir().unwrap();
    let g = PhaseGrid::symmetric(64, HbarContext::unit()).unwrap();
    let psi = hermite_function(1, *g.x_axis(), g.hbar()).unwrap();
    io::write_wave(&d.path().join("psi1.sgf"), &psi, g.hbar()).unwrap();
    let o = stargen(&["wigner", "psi1.sgf", "--window", "0", "--out", "w.sgf"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let w = io::read_phase(&d.path().join("w.sgf")).unwrap();
    let want = stargen::wigner::oscillator_stargen(1, 0, g).unwrap();
    assert!(w.max_abs_diff(&want).unwrap() < 1e-12);
    let o = stargen(&["wigner", "psi1.sgf", "--window", "psi1.sgf", "--out", "ww.sgf"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn williamson_command() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"hamiltonian": {"kind": "quadratic_nd", "m": [[1,0,0,0],[0,4,0,0],[0,0,1,0],[0,0,0,4]]}, "count": 4, "output_dir": "w"}"#;
    fs::write(d.path().join("m.json"), cfg).unwrap();
    let o = stargen(&["williamson", "--config", "m.json"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&d.path().join("w/williamson.json"));
    let om: Vec<f64> = v["omegas"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((om[0] - 1.0).abs() < 1e-12 && (om[1] - 4.0).abs() < 1e-12);
    let e: Vec<f64> = v["levels"].as_array().unwrap().iter().map(|l| l["energy"].as_f64().unwrap()).collect();
    for (a, b) in e.iter().zip([2.5, 3.5, 4.5, 5.5]) {
        assert!((a - b).abs() < 1e-12);
    }
    fs::write(d.path().join("nd.json"), r#"{"hamiltonian": {"kind": "quadratic_nd", "m": [[1,2],[2,1]]}}"#).unwrap();
    assert_eq!(stargen(&["williamson", "--config", "nd.json"], d.path()).status.code(), Some(2));
}

#[test]
fn verify_command() {
    let d = tempfile::tempdir().unwrap();
    let o = stargen(&["verify", "fourier"], d.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("PASS fourier/involution")), "{out}");
    let o = stargen(&["verify", "bogus"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));
}
