use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chiral-susy"))
        .args(args)
        .current_dir(dir)
        .env_remove("CHIRAL_SUSY_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn column(text: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let i = r.headers().unwrap().iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    r.records().map(|rec| rec.unwrap()[i].to_string()).collect()
}

#[test]
fn z_super_single_fermionic_source() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["z-super", "--beta", "2", "--n", "1", "--nu", "0", "--k2", "1", "--kappa2", "0+2i"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("z-super.csv")).unwrap();
    let re: f64 = column(&csv, "value_re")[0].parse().unwrap();
    let im: f64 = column(&csv, "value_im")[0].parse().unwrap();
    assert!((re - 1.0).abs() < 1e-10 && (im + 2.0).abs() < 1e-10, "{re} {im}");
    assert_eq!(String::from_utf8_lossy(&o.stdout), csv);
    let cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("z-super.config.json")).unwrap()).unwrap();
    assert_eq!(cfg["method"], "super");
    assert_eq!(cfg["kappa2"][0], "0+2i");
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = TempDir::new().unwrap();
    let first = run(dir.path(), &["z-super", "--n", "2", "--nu", "1", "--kappa1", "-1+0.5i", "--kappa2", "0.5+1i", "--name", "a"]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    // rerun from the written config under another stem
    let again = run(dir.path(), &["z-super", "--config", "a.config.json", "--name", "b"]);
    assert_eq!(code(&again), 0, "{}", stderr(&again));
    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn identity_suite_passes() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["verify", "--suite", "identities", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("verify.report.json")).unwrap();
    assert!(report.contains("\"passed\": true"));
    assert!(column(&fs::read_to_string(dir.path().join("verify.csv")).unwrap(), "passed").iter().all(|p| p == "true"));
}

#[test]
fn failing_scenario_exits_with_one() {
    // the finite-size deviation of the microscopic scenario exceeds its
    // tolerance at the largest n
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["verify", "--scenario", "micro"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("verification failed"));
    assert!(dir.path().join("verify.report.json").exists());
}

#[test]
fn plot_of_empty_csv_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("empty.csv"), "").unwrap();
    let o = run(dir.path(), &["plot", "--input", "empty.csv"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("empty.csv is empty"), "{}", stderr(&o));
    fs::write(dir.path().join("header.csv"), "kappa_re,kappa_im,value_re,value_im\n").unwrap();
    let o = run(dir.path(), &["plot", "--input", "header.csv"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("no data rows"));
    assert!(!dir.path().join("plot.svg").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"n": 1, "samples": 5}"#).unwrap();
    let cases: &[&[&str]] = &[
        &["z-super", "--config", "bad.json"],
        &["z-super", "--config", "missing.json"],
        &["z-super", "--kappa2", "1+2"],
        &["z-super", "--k2", "2", "--kappa2", "1i"],
        &["z-super", "--beta", "3"],
        &["z-super", "--ensemble", r#"{"kind":"lorentz","gamma":1,"mu":1}"#, "--kappa2", "1i"],
        &["z-ordinary", "--kappa1", "2"],
        &["verify"],
        &["verify", "--scenario", "no-such-scenario"],
        &["density", "--range", "3:1"],
    ];
    for args in cases {
        let o = run(dir.path(), args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn quadrature_failure_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"n": 2, "kappa2": ["1+1i"], "ensemble": {"kind": "quartic", "alpha": 1, "alpha_hat": 0},
                  "quad": {"max_nodes": 32, "rel_tol": 1e-14}}"#;
    fs::write(dir.path().join("q.json"), cfg).unwrap();
    let o = run(dir.path(), &["z-super", "--config", "q.json"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("node cap"));
}

#[test]
fn single_thread_output_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let args = |name: &'static str| {
        vec!["--threads", "1", "z-ordinary", "--n", "2", "--nu", "1", "--k2", "1", "--sweep", "-1+1i:1+1i:3", "--samples", "5000", "--seed", "9", "--name", name]
    };
    let a = run(dir.path(), &args("a"));
    let b = run(dir.path(), &args("b"));
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(code(&b), 0);
    let (ca, cb) = (fs::read(dir.path().join("a.csv")).unwrap(), fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(ca, cb);
    assert_eq!(column(&String::from_utf8(ca).unwrap(), "kappa_re"), vec!["-1", "0", "1"]);
}

#[test]
fn sweep_agrees_across_methods_and_plots() {
    let dir = TempDir::new().unwrap();
    let common = ["--n", "2", "--nu", "1", "--k2", "1", "--sweep", "-1+1i:2+1i:4"];
    let mc = run(dir.path(), &[&["z-ordinary", "--samples", "40000"][..], &common].concat());
    let sup = run(dir.path(), &[&["z-super"][..], &common].concat());
    assert_eq!(code(&mc), 0, "{}", stderr(&mc));
    assert_eq!(code(&sup), 0, "{}", stderr(&sup));
    let m = fs::read_to_string(dir.path().join("z-ordinary.csv")).unwrap();
    let s = fs::read_to_string(dir.path().join("z-super.csv")).unwrap();
    let num = |c: &str, col: &str| column(c, col).iter().map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>();
    let (mr, mi, se) = (num(&m, "mean_re"), num(&m, "mean_im"), num(&m, "stderr"));
    let (sr, si) = (num(&s, "value_re"), num(&s, "value_im"));
    for k in 0..4 {
        let z = ((mr[k] - sr[k]).powi(2) + (mi[k] - si[k]).powi(2)).sqrt() / se[k];
        assert!(z < 4.0, "point {k}: z = {z}");
    }

    let before = (m.clone(), s.clone());
    let p = run(dir.path(), &["plot", "--input", "z-ordinary.csv", "--input", "z-super.csv", "--output", "fig.svg"]);
    assert_eq!(code(&p), 0, "{}", stderr(&p));
    let svg = fs::read(dir.path().join("fig.svg")).unwrap();
    let text = String::from_utf8_lossy(&svg);
    assert!(text.starts_with("<svg") && text.contains("<polyline") && text.contains("<circle"));
    // rendering is a pure function of the inputs, which it leaves untouched
    let p2 = run(dir.path(), &["plot", "--input", "z-ordinary.csv", "--input", "z-super.csv", "--output", "fig2.svg"]);
    assert_eq!(code(&p2), 0);
    assert_eq!(fs::read(dir.path().join("fig2.svg")).unwrap(), svg);
    assert_eq!(fs::read_to_string(dir.path().join("z-ordinary.csv")).unwrap(), before.0);
    assert_eq!(fs::read_to_string(dir.path().join("z-super.csv")).unwrap(), before.1);
}

#[test]
fn microscopic_density_follows_the_bessel_law() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["density", "--n", "30", "--nu", "1", "--samples", "400", "--kind", "chiral", "--microscopic", "--range", "0:6", "--bins", "12"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("density.csv")).unwrap();
    let d: Vec<f64> = column(&csv, "density").iter().map(|v| v.parse().unwrap()).collect();
    let m: Vec<f64> = column(&csv, "micro_density").iter().map(|v| v.parse().unwrap()).collect();
    let l1: f64 = d.iter().zip(&m).map(|(a, b)| (a - b).abs() * 0.5).sum();
    assert!(l1 < 0.08, "L1 distance {l1}");
    let p = run(dir.path(), &["plot", "--input", "density.csv"]);
    assert_eq!(code(&p), 0, "{}", stderr(&p));
    assert!(fs::read_to_string(dir.path().join("plot.svg")).unwrap().contains("<path"));
}

#[test]
fn output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("results");
    let o = Command::new(env!("CARGO_BIN_EXE_chiral-susy"))
        .args(["z-micro", "--nu", "0", "--kappa2", "1+0i"])
        .current_dir(dir.path())
        .env("CHIRAL_SUSY_OUT_DIR", &out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("z-micro.csv")).unwrap();
    // (−i)^0 J_0(2) at ξ = 1
    let v: f64 = column(&csv, "value_re")[0].parse().unwrap();
    assert!((v - 0.223_890_779_141_235_67).abs() < 1e-9, "{v}");
}

#[test]
fn unquenched_estimators_agree() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["z-unquenched", "--n", "2", "--mass", "0.5", "--kappa2", "1+1i", "--samples", "20000"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("z-unquenched.csv")).unwrap();
    assert_eq!(column(&csv, "representation"), vec!["superspace", "ordinary_mc"]);
    let num = |col: &str| column(&csv, col).iter().map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>();
    let (re, im, err) = (num("value_re"), num("value_im"), num("err"));
    let z = ((re[0] - re[1]).powi(2) + (im[0] - im[1]).powi(2)).sqrt() / err[1];
    assert!(z < 4.0, "z = {z}");
}
