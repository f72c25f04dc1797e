use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn landau(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landau"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const CONFIG: &str = "n = 12\nL = 8.0\nt_end = 0.2\np = 2.0\nm = 55.0\n\
    snapshot_every = 1\ndt_max = 0.02\n\n\
    [initial.perturbed_maxwellian]\namplitude = 0.1\nmode = 1.0\n";

#[test]
fn exponents_prints_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let o = landau(&["exponents", "--p", "2", "--m", "55"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("gamma            0.278788"), "{text}");
    let o = landau(
        &["exponents", "--p", "2", "--m", "55", "--json"],
        dir.path(),
    );
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["beta1"].as_f64().unwrap() - 101.0 / 165.0).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        landau(&["diagnose", "missing"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(landau(&["nonsense"], dir.path()).status.code(), Some(2));
    assert_eq!(
        landau(&["exponents", "--p", "1.4", "--m", "55"], dir.path())
            .status
            .code(),
        Some(2)
    );
    fs::write(
        dir.path().join("bad.toml"),
        CONFIG.replace("p = 2.0", "p = 1.4"),
    )
    .unwrap();
    let o = landau(&["run", "--config", "bad.toml", "--out", "x"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p must exceed 3/2"));
}

#[test]
fn run_then_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.toml"), CONFIG).unwrap();
    let o = landau(
        &["run", "--config", "cfg.toml", "--out", "traj"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let traj = dir.path().join("traj");
    for f in [
        "manifest.json",
        "trajectory.txt",
        "scalars.csv",
        "snapshots/snap_000000.f64",
    ] {
        assert!(traj.join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(traj.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["n"], 12);
    assert!(manifest["abort"].is_null());
    for p in manifest["outputs"].as_array().unwrap() {
        assert!(dir.path().join(p.as_str().unwrap()).exists());
    }

    let o = landau(&["diagnose", "traj"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in [
        "e0",
        "level_sets",
        "degiorgi",
        "moment_bounds",
        "smoothing",
        "ode_barrier",
    ] {
        assert!(!report[key].is_null(), "{key}");
    }
    assert!(report["e0"].as_f64().unwrap() > 0.0);
    assert_eq!(report["degiorgi"]["verdict"], true);
    for csv in ["level_sets.csv", "degiorgi.csv", "moments.csv", "norms.csv"] {
        assert!(traj.join("diagnostics").join(csv).exists(), "{csv}");
    }
}

#[test]
fn sweep_writes_one_directory_per_point() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cfg.toml"),
        CONFIG.replace("t_end = 0.2", "t_end = 0.05"),
    )
    .unwrap();
    let o = landau(
        &[
            "sweep",
            "--config",
            "cfg.toml",
            "--out",
            "sw",
            "--amplitudes",
            "0.05,0.1",
            "--n",
            "12",
            "--p",
            "2,3",
            "--workers",
            "2",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("sw/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(dir.path().join("sw/a0.1_n12_p3/manifest.json").exists());
}

#[test]
fn verify_passes_at_n32() {
    let dir = tempfile::tempdir().unwrap();
    let started = std::time::Instant::now();
    let o = landau(&["verify", "--n", "32", "--L", "8"], dir.path());
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(started.elapsed().as_secs() <= 120);
    assert!(!stdout(&o).contains("FAIL"));
}
