use std::path::Path;
use std::process::{Command, Output};

fn snls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snls"))
        .args(args)
        .env_remove("SNLS_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn write_preset(dir: &Path, name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let o = snls(&["presets", name]);
    assert_eq!(code(&o), 0);
    let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    edit(&mut v);
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&snls(&[])), 1);
    assert_eq!(code(&snls(&["simulate", "--bogus"])), 1);
    assert_eq!(code(&snls(&["theory"])), 1);
    assert_eq!(code(&snls(&["theory", "--preset", "nope"])), 1);
    assert_eq!(code(&snls(&["--help"])), 0);
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_preset(dir.path(), "add-mass-drift", |v| v["run"]["dt"] = 10.0.into());
    let o = snls(&["simulate", "--config", &path]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("t_end"));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&snls(&["theory", "--config", bad.to_str().unwrap()])), 1);
    assert_eq!(code(&snls(&["theory", "--config", "/no/such/file.json"])), 2);
}

#[test]
fn presets_are_listed() {
    let o = snls(&["presets"]);
    let names: Vec<String> = String::from_utf8(o.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(names.len(), snls::presets::NAMES.len());
    assert!(names.contains(&"blowup-mult".to_string()));
}

#[test]
fn theory_embeds_hash() {
    let o = snls(&["theory", "--preset", "mult-survival-below-tstar"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let hash = snls::presets::preset("mult-survival-below-tstar").unwrap().hash();
    assert_eq!(v["config_hash"], hash.as_str());
    assert_eq!(v["report"]["regime"], "global_side");
    assert_eq!(v["report"]["t_star_mult"]["kind"], "finite");
}

#[test]
fn simulate_writes_records_with_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = snls(&["simulate", "--preset", "add-mass-drift", "--index", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let hash = v["config_hash"].as_str().unwrap().to_string();
    let (samples, summary) = snls::io::read_trajectory_jsonl(out.join("trajectory.jsonl")).unwrap();
    assert!(!samples.is_empty());
    assert_eq!(summary.config_hash, hash);
    let csv = std::fs::read_to_string(out.join("samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), samples.len() + 1);
}

#[test]
fn ensemble_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let run = |w: &str| {
        let out = dir.path().join(format!("w{w}"));
        let o = snls(&[
            "ensemble", "--preset", "add-critical", "--n-traj", "16", "--workers", w, "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out.join("summary.json")).unwrap()
    };
    assert_eq!(run("1"), run("8"));
}

#[test]
fn workers_come_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_snls"))
        .args(["ensemble", "--preset", "add-critical", "--n-traj", "4"])
        .env("SNLS_WORKERS", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn ground_state_cache_fault_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gs");
    let o = snls(&["ground-state", "--n", "1", "--sigma", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let file = out.join("ground_state.json");
    let profile = std::fs::read_to_string(out.join("profile.csv")).unwrap();
    assert!(profile.starts_with("r,q"));
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let g = v["grad_sq"].as_f64().unwrap();
    v["grad_sq"] = (g * 1.01).into();
    std::fs::write(&file, v.to_string()).unwrap();
    let o = snls(&["verify", "quick", "--ground-state", file.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("pohozaev_gradient"), "{err}");
}

#[test]
fn unsupported_ground_state_is_a_validation_error() {
    assert_eq!(code(&snls(&["ground-state", "--n", "3", "--sigma", "3"])), 1);
}
