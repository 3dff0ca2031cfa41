use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amalgam-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn assoc_row() {
    let o = bin(&["assoc", "--sigma", "1", "--rho", "2.71828"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
    let v: f64 = r[0][3].parse().unwrap();
    // The maximiser is p = 2: M(ρ) = 2 ln ρ − ln 2.
    assert!((v - (2.0 * 2.71828f64.ln() - 2f64.ln())).abs() < 1e-14);
    assert!((v - 1.306853).abs() < 1e-5);
    assert_eq!(r[0][6], "true");
}

#[test]
fn retraction_passes() {
    let o = bin(&["verify", "retraction"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 9);
    assert!(r.iter().all(|row| row[6] == "true"));
}

#[test]
fn bad_exponent_is_a_config_error() {
    let o = bin(&["norm", "cont", "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("p must be ≥ 1"), "{e}");
    assert_eq!(e.trim().lines().count(), 1);
}

#[test]
fn diagnostics_name_the_key() {
    let o = bin(&["norm", "cont", "--f", "gauss:x0=zz"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`f`"));
    let o = bin(&["--delta", "0.3", "norm", "cont"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`delta`"));
    let o = bin(&["norm", "cont", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--bogus"));
    assert_eq!(stderr(&o).trim().lines().count(), 1);
    let o = bin(&["norm", "cont", "--chi", "zero"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`chi`"));
}

#[test]
fn config_file_and_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("norm.csv");
    std::fs::write(&cfg, "# closed-form check\nf = gauss:x0=0,xi0=0,a=1\nchi = gauss:x0=0,xi0=0,a=1\nE = lp:p=2,weight=const\np = 1\n").unwrap();
    let o = bin(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "norm", "both"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&std::fs::read_to_string(&out).unwrap());
    let cont: f64 = r[0][1].parse().unwrap();
    assert!((cont - 1.0).abs() < 1e-8);
    assert!(r[0][3].parse::<f64>().unwrap() > 0.0);
    assert_eq!(r[0][4], "false");
    std::fs::write(&cfg, "gamma = 1\n").unwrap();
    let o = bin(&["--config", cfg.to_str().unwrap(), "norm", "cont"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gamma"));
}

#[test]
fn failing_row_exits_one() {
    let o = bin(&["weights", "--weight", "poly:2", "--c", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(rows(&stdout(&o))[0][6], "false");
    let o = bin(&["weights", "--weight", "poly:2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn ucpu_commands() {
    let o = bin(&["ucpu", "build", "a=1", "s=1", "L=12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("lemma,parameter,value,slack"));
    let r = rows(&text);
    let c2 = r.iter().find(|row| row[0] == "condition2").unwrap();
    // Closed cubes of adjacent points share an endpoint.
    assert_eq!(c2[2], "2");
    let c4 = r.iter().find(|row| row[0] == "condition4").unwrap();
    assert!(c4[2].parse::<f64>().unwrap() < 1e-10);
    let o = bin(&["ucpu", "check", "--cond", "1", "--h", "0.25", "--K", "8"]);
    assert_eq!(rows(&stdout(&o)).len(), 1);
    let o = bin(&["ucpu", "lemma39", "--h", "1", "--eps", "0.1"]);
    let r = rows(&stdout(&o));
    assert_eq!(r[0][2], "5");
    assert!(r[1][2].parse::<f64>().unwrap() >= 5.0);
    let o = bin(&["ucpu", "build", "a=0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stft_columns() {
    let o = bin(&["--L", "8", "--delta", "0.125", "stft"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("x,xi,re,im,abs"));
    let r = rows(&text);
    let peak = r
        .iter()
        .find(|row| row[0] == "0" && row[1] == "0")
        .map(|row| row[4].parse::<f64>().unwrap())
        .unwrap();
    assert!((peak - 0.5f64.sqrt()).abs() < 1e-8);
}

#[test]
fn seeded_sweeps_reproduce() {
    let a = bin(&["verify", "duality", "--trials", "12", "--seed", "3"]);
    let b = bin(&["verify", "duality", "--trials", "12", "--seed", "3", "--jobs", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    let c = bin(&["verify", "duality", "--trials", "12", "--seed", "4"]);
    assert_ne!(stdout(&a), stdout(&c));
    let o = bin(&["verify", "nothing"]);
    assert_eq!(o.status.code(), Some(2));
}
