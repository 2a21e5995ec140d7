use proptest::prelude::*;
use snls::config::ExperimentConfig;
use snls::io;
use snls::lab::Lab;
use snls::presets;
use snls::LabError;

fn small(name: &str) -> ExperimentConfig {
    let mut c = presets::preset(name).unwrap();
    c.ensemble.n_traj = 12;
    c
}

#[test]
fn every_preset_validates_and_builds() {
    for name in presets::NAMES {
        let cfg = presets::preset(name).unwrap();
        cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        let lab = Lab::new(cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
        lab.theory().unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    assert!(presets::preset("no-such-preset").is_none());
}

#[test]
fn config_json_round_trip_keeps_the_hash() {
    for name in presets::NAMES {
        let cfg = presets::preset(name).unwrap();
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }
}

#[test]
fn hash_ignores_output_but_not_physics() {
    let cfg = presets::preset("add-mass-drift").unwrap();
    let mut out = cfg.clone();
    out.output.dir = Some("/tmp/elsewhere".into());
    out.output.records = true;
    assert_eq!(out.hash(), cfg.hash());
    let mut seed = cfg.clone();
    seed.ensemble.master_seed += 1;
    assert_ne!(seed.hash(), cfg.hash());
    let mut dt = cfg.clone();
    dt.run.dt *= 0.5;
    assert_ne!(dt.hash(), cfg.hash());
    assert_eq!(cfg.hash().len(), 64);
}

#[test]
fn validation_errors() {
    let base = presets::preset("add-mass-drift").unwrap();
    let mut c = base.clone();
    c.run.dt = c.run.t_end;
    assert!(matches!(c.validate(), Err(LabError::Validation(_))));
    let mut c = base.clone();
    c.covariance = None;
    assert!(matches!(c.validate(), Err(LabError::Validation(_))));
    let mut c = base.clone();
    c.ensemble.n_traj = 0;
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.schema_version = 99;
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.grid.points = vec![7];
    assert!(c.validate().is_err());
    let mut c = presets::preset("mult-intercritical-3d-cubic").unwrap();
    c.physics.sigma = 2.5;
    assert!(c.validate().is_err());
    c.physics.conditional_regime = true;
    assert!(c.validate().is_ok());
    let mut c = presets::preset("det-critical-above").unwrap();
    c.run.blowup_gradient = 0.5;
    assert!(matches!(Lab::new(c), Err(LabError::Validation(_))));
    assert!(ExperimentConfig::from_json("{\"name\": 3}").is_err());
}

#[test]
fn summaries_do_not_depend_on_workers() {
    for name in ["add-mass-drift", "mult-critical-survival"] {
        let lab = Lab::new(small(name)).unwrap();
        let (a, ra) = lab.ensemble(1).unwrap();
        let (b, rb) = lab.ensemble(4).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn outputs_carry_the_config_hash() {
    let lab = Lab::new(small("add-critical")).unwrap();
    assert_eq!(lab.theory_document().unwrap().config_hash, lab.hash);
    assert_eq!(lab.trajectory_document(0).unwrap().config_hash, lab.hash);
    let (s, _) = lab.ensemble(2).unwrap();
    assert_eq!(s.config_hash, lab.hash);
    assert_eq!(s.notes.len(), snls::lab::NOTES.len());
}

#[test]
fn record_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let lab = Lab::new(small("add-mass-drift")).unwrap();
    let doc = lab.trajectory_document(3).unwrap();
    let path = dir.path().join("t.jsonl");
    io::write_trajectory_jsonl(&path, &doc).unwrap();
    let (samples, summary) = io::read_trajectory_jsonl(&path).unwrap();
    assert_eq!(samples, doc.result.samples);
    assert_eq!(summary.config_hash, lab.hash);
    assert_eq!(summary.status, doc.result.status);
    assert_eq!(summary.index, 3);
    let csv = dir.path().join("s.csv");
    io::write_samples_csv(&csv, &doc.result.samples).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().next().unwrap().starts_with("t,mass,energy"));
    assert_eq!(text.lines().count(), doc.result.samples.len() + 1);
}

#[test]
fn trajectories_are_reproducible_by_index() {
    let lab = Lab::new(small("mult-energy-drift")).unwrap();
    assert_eq!(lab.trajectory(5).unwrap(), lab.trajectory(5).unwrap());
    assert_ne!(lab.trajectory(5).unwrap().samples, lab.trajectory(6).unwrap().samples);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hash_is_stable_under_reserialization(seed in any::<u64>(), dt_scale in 0.5f64..1.0) {
        let mut cfg = presets::preset("add-intercritical").unwrap();
        cfg.ensemble.master_seed = seed;
        cfg.run.dt *= dt_scale;
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.hash(), cfg.hash());
    }
}
