use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mhdk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhdk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const SMALL: &str = "dim = 2
n = 32
box_length = 6.283185307179586
mu = 0.02
nu = 0.02
dt = 0.01
t_end = 0.2
init = random_band
seed = 3
record_every = 2
s_list = 2
q_list = 4, inf
amplitude = 0.5
k_max = 6
checkpoint_every = 10
";

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&mhdk(&["--help"])), 0);
    assert_eq!(code(&mhdk(&[])), 1);
    assert_eq!(code(&mhdk(&["run", "--bogus"])), 1);
    assert_eq!(code(&mhdk(&["fit-decay", "--series", "x.csv"])), 1);
}

#[test]
fn run_writes_series_manifest_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.cfg", SMALL);
    let out_a = dir.path().join("a");
    let o = mhdk(&["run", "--config", &cfg, "--out", out_a.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out_a.join("norms.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,l2_pair,h1_pair,hs:2,lq:4,lq:inf,diss_u_acc,diss_b_acc"
    );
    assert_eq!(lines.count(), 11);
    for f in ["manifest.json", "final.mhdk", "step_00000010.mhdk", "step_00000020.mhdk"] {
        assert!(out_a.join(f).exists(), "{f} missing");
    }

    let out_b = dir.path().join("b");
    let manifest = out_a.join("manifest.json");
    let o = mhdk(&["run", "--from-manifest", manifest.to_str().unwrap(), "--out", out_b.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(out_a.join("norms.csv")).unwrap(), fs::read(out_b.join("norms.csv")).unwrap());

    let o = mhdk(&["norms", "--checkpoint", out_a.join("final.mhdk").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("norm,value\nt,2e-1\n"), "{text}");

    let series = out_a.join("norms.csv");
    let o = mhdk(&["fit-decay", "--series", series.to_str().unwrap(), "--s", "1", "--window", "0.02:0.2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("norm,t_a,t_b,samples,slope"));
}

#[test]
fn configuration_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.cfg", &SMALL.replace("mu = 0.02", "mu = -1"));
    let o = mhdk(&["run", "--config", &bad, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let typo = write_config(dir.path(), "typo.cfg", &format!("{SMALL}nuu = 0.01\n"));
    let o = mhdk(&["run", "--config", &typo, "--out", dir.path().join("o2").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("typo.cfg:16"));
}

#[test]
fn cfl_abort_exits_with_2_and_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("amplitude = 0.5", "amplitude = 200")
        .replace("dt = 0.01", "dt = 0.05")
        .replace("t_end = 0.2", "t_end = 1")
        + "abort_on_cfl = true\n";
    let cfg = write_config(dir.path(), "cfl.cfg", &text);
    let out = dir.path().join("o");
    let o = mhdk(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("aborted"), "{manifest}");
}

#[test]
fn inequality_constants_csv() {
    let o = mhdk(&["check-inequalities", "--dim", "2", "--cases", "2.7a,2.9d(0,2)", "--samples", "8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "case,dim,points_per_axis,samples,seed,max_ratio,mean_ratio,degenerate");
    assert_eq!(lines.len(), 3);
    let o = mhdk(&["check-inequalities", "--dim", "2", "--cases", "2.10a"]);
    assert_eq!(code(&o), 1);
}
