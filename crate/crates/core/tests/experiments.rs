use std::path::Path;

use autonomy_lab::experiments::{
    emit_plot_data, run_experiment, ExperimentConfig, ExperimentId, RunManifest, RunStatus, PLOT_DIR,
};

fn small(id: ExperimentId) -> ExperimentConfig {
    let text = match id {
        ExperimentId::EcaRun => {
            "experiment = \"eca-run\"\nrules = [110]\nwidth = 16\nsteps = 20\nseeds = 2\nbinary_log = true\n"
        }
        ExperimentId::EmbedCheck => "experiment = \"embed-check\"\nenumeration = false\nbudget = 500\n",
        ExperimentId::PredictSweep => {
            "experiment = \"predict-sweep\"\nrules = [90, 110]\nwidth = 32\nhorizons = [1, 8, 64]\nseeds = 3\n"
        }
        ExperimentId::ComplexitySweep => {
            "experiment = \"complexity-sweep\"\nrules = [0, 110]\nwidth = 32\nsteps = 200\nstride = 50\nseeds = 2\n"
        }
        ExperimentId::HaltingSweep => "experiment = \"halting-sweep\"\nbudget = 30\n",
        ExperimentId::AutonomyReport => "experiment = \"autonomy-report\"\nprobe_budget = 256\nsteps = 500\n",
    };
    ExperimentConfig::parse_str(text, Path::new(".")).unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for id in ExperimentId::ALL {
        let cfg = small(id);
        let a = run_experiment(&cfg, &tmp.path().join(format!("{id}-a")), 11).unwrap();
        let b = run_experiment(&cfg, &tmp.path().join(format!("{id}-b")), 11).unwrap();
        assert_eq!(a.status, RunStatus::Completed);
        assert!(!a.outputs.is_empty(), "{id}");
        assert_eq!(a.outputs, b.outputs, "{id}");
        assert_eq!(a.config_hash, b.config_hash);
        for o in &a.outputs {
            let x = std::fs::read(tmp.path().join(format!("{id}-a")).join(&o.file)).unwrap();
            let y = std::fs::read(tmp.path().join(format!("{id}-b")).join(&o.file)).unwrap();
            assert_eq!(x, y, "{id}/{}", o.file);
        }
    }
}

#[test]
fn seeds_matter_where_randomness_is_used() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small(ExperimentId::EcaRun);
    let a = run_experiment(&cfg, &tmp.path().join("a"), 1).unwrap();
    let b = run_experiment(&cfg, &tmp.path().join("b"), 2).unwrap();
    assert_ne!(a.outputs, b.outputs);
    // the enumeration has no randomness at all
    let cfg = small(ExperimentId::HaltingSweep);
    let a = run_experiment(&cfg, &tmp.path().join("c"), 1).unwrap();
    let b = run_experiment(&cfg, &tmp.path().join("d"), 2).unwrap();
    assert_eq!(a.outputs, b.outputs);
}

#[test]
fn tampering_is_detected() {
    let tmp = tempfile::tempdir().unwrap();
    let m = run_experiment(&small(ExperimentId::HaltingSweep), tmp.path(), 5).unwrap();
    assert!(m.verify(tmp.path()).unwrap().is_empty());
    std::fs::write(tmp.path().join("halting.csv"), "machine\n").unwrap();
    assert_eq!(m.verify(tmp.path()).unwrap(), vec!["halting.csv".to_string()]);
    assert_eq!(RunManifest::load(tmp.path()).unwrap(), m);
}

#[test]
fn plot_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("predict");
    run_experiment(&small(ExperimentId::PredictSweep), &dir, 3).unwrap();
    let files = emit_plot_data(&dir).unwrap();
    let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
    assert!(names.iter().all(|n| n.starts_with("accuracy-")));
    let t = std::fs::read_to_string(&files[0]).unwrap();
    let header: Vec<&str> = t.lines().next().unwrap().split(',').collect();
    assert_eq!(header[0], "t");
    assert!(header.len() > 2);
    assert_eq!(t.lines().count(), 1 + 3);

    let dir = tmp.path().join("complexity");
    run_experiment(&small(ExperimentId::ComplexitySweep), &dir, 3).unwrap();
    emit_plot_data(&dir).unwrap();
    let khat = std::fs::read_to_string(dir.join(PLOT_DIR).join("khat.csv")).unwrap();
    assert_eq!(khat.lines().next().unwrap(), "t,rule0,rule110,constant");
    assert_eq!(khat.lines().count(), 1 + 4);

    let dir = tmp.path().join("eca");
    run_experiment(&small(ExperimentId::EcaRun), &dir, 3).unwrap();
    assert!(emit_plot_data(&dir).is_err());
}

#[test]
fn embed_check_over_the_bundled_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    run_experiment(&small(ExperimentId::EmbedCheck), tmp.path(), 0).unwrap();
    let csv = std::fs::read_to_string(tmp.path().join("embed-check.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.split(',').nth(2) == Some("true")), "{csv}");
}
