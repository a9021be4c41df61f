use std::path::Path;
use std::process::{Command, Output};

fn capwater(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capwater")).args(args).output().expect("spawn capwater")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(csv_text: &str, name: &str) -> Vec<f64> {
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).expect("column");
    rdr.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

fn write_gm(dir: &Path) -> String {
    let path = dir.join("gm.json");
    std::fs::write(&path, r#"{"type": "gauss_markov", "N": 1.0, "phi": 0.85}"#).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn one_mode_json() {
    let out = stdout(&capwater(&["one-mode", "--gq", "2", "--gp", "0.5", "--nbar", "2", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["regime"], "water_filling");
    assert!((v[0]["chi"].as_f64().unwrap() - 1.34528).abs() < 1e-4);
    assert_eq!(v[0]["lambda"].as_f64().unwrap(), 5.0);
}

#[test]
fn spectral_from_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_gm(dir.path());
    let out = stdout(&capwater(&["spectral", "--model", &model, "--nbar", "1"]));
    let mu = column(&out, "mu");
    assert_eq!(mu.len(), 1);
    assert!((mu[0] - 0.42).abs() < 0.01, "mu {}", mu[0]);
    let nodes = stdout(&capwater(&["spectral", "--gm", "1,0.85", "--nbar", "1", "--spectra", "--grid-size", "64"]));
    assert_eq!(column(&nodes, "x").len(), 128);
}

#[test]
fn gain_stays_below_bound() {
    let out = stdout(&capwater(&[
        "gain", "--gm", "1,0.85", "--nbar-grid", "0.1:50:40", "--snr", "3", "--grid-size", "256",
    ]));
    let g = column(&out, "gain");
    assert_eq!(g.len(), 40);
    assert!(g.iter().all(|v| *v >= 1.0 - 1e-9 && *v <= 1.12), "{g:?}");
}

#[test]
fn finite_summary_counts_modes() {
    let out = stdout(&capwater(&["finite", "--modes", "2:0.5,1:1,3:0.2", "--nbar", "1", "--summary"]));
    let n: Vec<f64> = ["n1", "n2", "n3"].iter().map(|c| column(&out, c)[0]).collect();
    assert_eq!(n.iter().sum::<f64>(), 3.0);
    assert_eq!(column(&out, "lambda")[0], 9.0);
}

#[test]
fn verify_passes_on_reference_channel() {
    let out = stdout(&capwater(&["verify", "--gq", "2", "--gp", "0.5", "--nbar", "2"]));
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let passed: Vec<String> = rdr.records().map(|r| r.unwrap()[3].to_owned()).collect();
    assert!(passed.len() >= 6);
    assert!(passed.iter().all(|p| p == "true"));
}

#[test]
fn output_is_deterministic() {
    let args = ["sweep", "--gm", "1,0.5", "--nbar-grid", "0.5:4:5", "--phi-grid", "0:0.6:3", "--grid-size", "128"];
    let a = capwater(&args);
    let b = capwater(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(column(&stdout(&a), "mu").len(), 15);
}

#[test]
fn malformed_model_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"type\": \"gauss_markov\",\n \"n\": 1, \"phi\": }").unwrap();
    let out = capwater(&["spectral", "--model", path.to_str().unwrap(), "--nbar", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error[model_json]") && err.contains("line 2"), "{err}");
}

#[test]
fn bad_arguments_exit_nonzero() {
    for args in [
        vec!["one-mode", "--gq", "2", "--nbar", "1"],
        vec!["one-mode", "--gq", "2", "--gp", "0.5", "--nbar", "1", "--lambda", "3"],
        vec!["spectral", "--gm", "1,2", "--nbar", "1"],
        vec!["gain", "--gm", "1,0.5", "--nbar-grid", "0:5:3", "--log"],
        vec!["one-mode", "--gq=-1", "--gp", "0.5", "--nbar", "1"],
    ] {
        let out = capwater(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn failed_run_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.csv");
    let out = capwater(&["spectral", "--gm", "1,2", "--nbar", "1", "-o", target.to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);

    let ok = capwater(&["one-mode", "--gq", "2", "--gp", "0.5", "--nbar", "2", "-o", target.to_str().unwrap()]);
    assert!(ok.status.success() && ok.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.starts_with("gq,gp,lambda,nbar,regime"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["gain", "--gm", "1,0.7", "--nbar-grid", "0.5:8:6", "--grid-size", "128"];
    let one = Command::new(env!("CARGO_BIN_EXE_capwater")).args(args).env("CAPWATER_THREADS", "1").output().unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_capwater")).args(args).env("CAPWATER_THREADS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
}
