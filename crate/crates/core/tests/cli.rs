use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use relbohm::scenario::{find_bundled, RunManifest};

fn relbohm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relbohm"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn list_shows_unique_required_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    let out = relbohm(&["list"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    let unique: HashSet<&str> = names.iter().copied().collect();
    assert_eq!(unique.len(), names.len());
    for required in [
        "single-rest-particle",
        "two-mode-beat",
        "epr-pair-foliation",
        "epr-pair-equilibrium",
        "twisted-field-surfaces",
        "covariance-suite",
    ] {
        assert!(unique.contains(required), "{required} missing");
    }
    assert!(!text.contains("invalid"));
}

#[test]
fn rest_particle_moves_along_the_time_axis() {
    let tmp = tempfile::tempdir().unwrap();
    let out = relbohm(&["run", "single-rest-particle", "--output-dir", "rest"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("rest/trajectories.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("sample_id,particle,tau,t,x,y,z"));
    let mut rows = 0;
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((f[3] - f[2]).abs() < 1e-12);
        assert_eq!(&f[4..], &[0.0, 0.0, 0.0]);
        rows += 1;
    }
    assert_eq!(rows, 501);
    let m = manifest(&tmp.path().join("rest"));
    let names: Vec<&str> = m.files.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, ["trajectories.csv", "summary.json"]);
}

#[test]
fn missing_mass_is_a_config_error_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let text = find_bundled("single-rest-particle")
        .unwrap()
        .json
        .replace("\"mass\": 1.0,", "");
    assert!(!text.contains("\"mass\""));
    fs::write(tmp.path().join("bad.json"), text).unwrap();
    let out = relbohm(&["run", "bad.json", "--output-dir", "bad-out"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mass"));
    assert!(!tmp.path().join("bad-out").exists());
    let entries: Vec<_> = fs::read_dir(tmp.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
}

#[test]
fn unknown_keys_and_missing_files_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let text =
        find_bundled("single-rest-particle")
            .unwrap()
            .json
            .replacen("\"seed\": 1,", "\"seed\": 1, \"extra\": 0,", 1);
    fs::write(tmp.path().join("extra.json"), text).unwrap();
    assert_eq!(relbohm(&["run", "extra.json"], tmp.path()).status.code(), Some(2));
    assert_eq!(
        relbohm(&["run", "does-not-exist.json"], tmp.path()).status.code(),
        Some(2)
    );
}

#[test]
fn numerical_and_statistical_failures_have_their_own_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let stiff = find_bundled("twisted-field-dynamics")
        .unwrap()
        .json
        .replace("\"max_iterations\": 50", "\"max_iterations\": 1")
        .replace("\"fixed_point_tol\": 1e-08", "\"fixed_point_tol\": 1e-15");
    fs::write(tmp.path().join("stiff.json"), stiff).unwrap();
    let out = relbohm(&["run", "stiff.json", "--output-dir", "stiff"], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!tmp.path().join("stiff").exists());

    // every test fails at a significance level of 1
    let strict = find_bundled("stationary-equilibrium")
        .unwrap()
        .json
        .replace("\"alpha\": 0.01", "\"alpha\": 1.0")
        .replace("\"samples\": 20000", "\"samples\": 500");
    fs::write(tmp.path().join("strict.json"), strict).unwrap();
    let out = relbohm(&["run", "strict.json", "--output-dir", "strict"], tmp.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(tmp.path().join("strict/statistics.json").exists());
}

#[test]
fn seed_override_and_manifest_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let small = find_bundled("epr-pair-equilibrium")
        .unwrap()
        .json
        .replace("\"samples\": 20000", "\"samples\": 400");
    fs::write(tmp.path().join("small.json"), small).unwrap();
    let run = |args: &[&str]| {
        let out = relbohm(args, tmp.path());
        assert!(out.status.code() == Some(0) || out.status.code() == Some(4));
    };
    run(&[
        "run",
        "small.json",
        "--seed",
        "77",
        "--output-dir",
        "a",
        "--threads",
        "2",
    ]);
    let a = manifest(&tmp.path().join("a"));
    assert_eq!(a.seed, 77);
    assert_eq!(a.config.seed, 77);
    assert_eq!(a.config.output_dir, Path::new("a"));

    // the embedded config reproduces the run
    let mut config = a.config.clone();
    config.output_dir = "b".into();
    fs::write(
        tmp.path().join("resolved.json"),
        serde_json::to_string_pretty(&config).unwrap(),
    )
    .unwrap();
    run(&["run", "resolved.json"]);
    let b = manifest(&tmp.path().join("b"));
    assert_eq!(a.files, b.files);

    run(&["run", "small.json", "--output-dir", "c"]);
    let c = manifest(&tmp.path().join("c"));
    assert_eq!(c.seed, 13);
    assert_ne!(a.files, c.files);
}
