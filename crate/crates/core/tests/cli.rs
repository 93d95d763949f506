use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use autonomy_lab::experiments::{RunManifest, RunStatus, MANIFEST_FILE, PLOT_DIR};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_autonomy-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary starts")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn halting_sweep_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "h.toml", "experiment = \"halting-sweep\"\nbudget = 50\n");
    let out = tmp.path().join("out");
    let o = run(&["halting-sweep", "--config", s(&cfg), "--out", s(&out), "--seed", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("  halting.csv"), "{stdout}");

    let m = RunManifest::load(&out).unwrap();
    assert_eq!(m.status, RunStatus::Completed);
    assert_eq!(m.master_seed, 1);
    assert!(m.verify(&out).unwrap().is_empty());

    let o = run(&["emit-plot-data", s(&out)]);
    assert!(o.status.success());
    let hist = std::fs::read_to_string(out.join(PLOT_DIR).join("halting-histogram.csv")).unwrap();
    assert!(hist.starts_with("halting_step,machines\n"));
    let total: u64 = hist.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    let reached = std::fs::read_to_string(out.join("halting.csv")).unwrap().matches(",reached,").count() as u64;
    assert_eq!(total, reached);
}

#[test]
fn budget_flag_overrides_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "h.toml", "experiment = \"halting-sweep\"\nbudget = 10000\n");
    let out = tmp.path().join("out");
    let o = run(&["halting-sweep", "--config", s(&cfg), "--out", s(&out), "--seed", "1", "--budget", "3"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out.join("halting.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("3")));

    // eca-run has no budget to override
    let cfg = write(tmp.path(), "e.toml", "experiment = \"eca-run\"\nsteps = 4\n");
    let o = run(&["eca-run", "--config", s(&cfg), "--out", s(&out), "--seed", "1", "--budget", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_exit_2_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write(tmp.path(), "bad.toml", "experiment = \"eca-run\"\nwidth = 64\nstepz = 10\n");
    let o = run(&["eca-run", "--config", s(&cfg), "--out", s(&out), "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.toml") && err.contains(":3:") && err.contains("stepz"), "{err}");
    assert!(!out.join(MANIFEST_FILE).exists());

    let cfg = write(tmp.path(), "wrong.toml", "experiment = \"halting-sweep\"\n");
    let o = run(&["eca-run", "--config", s(&cfg), "--out", s(&out), "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["eca-run", "--config", s(&tmp.path().join("missing.toml")), "--out", s(&out), "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));

    // the seed is mandatory
    let cfg = write(tmp.path(), "ok.toml", "experiment = \"eca-run\"\n");
    let o = run(&["eca-run", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    // a regular file where the output directory should go
    let blocker = write(tmp.path(), "blocker", "");
    let cfg = write(tmp.path(), "e.toml", "experiment = \"eca-run\"\nsteps = 4\n");
    let o = run(&["eca-run", "--config", s(&cfg), "--out", s(&blocker.join("out")), "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));

    let o = run(&["emit-plot-data", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing results file"));
}

#[test]
fn help_and_version_succeed() {
    assert!(run(&["--help"]).status.success());
    assert!(run(&["--version"]).status.success());
}
