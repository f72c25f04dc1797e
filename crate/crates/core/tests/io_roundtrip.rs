use std::fs;

use landau_core::io::{
    read_scalars_csv, read_trajectory, write_scalars_csv, write_trajectory, SCALAR_COLUMNS,
};
use landau_core::{run, Error, InitialDatum, SimConfig};

fn small_run() -> landau_core::Trajectory {
    let mut cfg = SimConfig::new(
        12,
        6.0,
        0.3,
        InitialDatum::PerturbedMaxwellian {
            amplitude: 0.2,
            mode: 1.0,
        },
    );
    cfg.snapshot_every = 2;
    run(&cfg).unwrap()
}

#[test]
fn trajectory_round_trip_is_bit_exact() {
    let traj = small_run();
    let dir = tempfile::tempdir().unwrap();
    write_trajectory(&traj, dir.path()).unwrap();
    let back = read_trajectory(dir.path()).unwrap();
    assert_eq!(back.grid, traj.grid);
    assert_eq!(back.p, traj.p);
    assert_eq!(back.scalars, traj.scalars);
    assert_eq!(back.snapshots.len(), traj.snapshots.len());
    for (a, b) in back.snapshots.iter().zip(&traj.snapshots) {
        assert_eq!(a.time.to_bits(), b.time.to_bits());
        assert!(a
            .f
            .values()
            .iter()
            .zip(b.f.values())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert!(back.abort.is_none());
}

#[test]
fn csv_header_and_rows() {
    let traj = small_run();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    write_scalars_csv(&traj.scalars, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), SCALAR_COLUMNS.join(","));
    assert_eq!(text.lines().count(), traj.scalars.len() + 1);
    assert_eq!(read_scalars_csv(&path).unwrap(), traj.scalars);
}

#[test]
fn mismatched_snapshot_grid_is_rejected() {
    let traj = small_run();
    let dir = tempfile::tempdir().unwrap();
    write_trajectory(&traj, dir.path()).unwrap();
    let side = dir.path().join("snapshots/snap_000000.txt");
    let text = fs::read_to_string(&side)
        .unwrap()
        .replace("n = 12", "n = 16");
    fs::write(&side, text).unwrap();
    assert!(matches!(
        read_trajectory(dir.path()),
        Err(Error::GridMismatch(_))
    ));
}

#[test]
fn truncated_snapshot_is_rejected() {
    let traj = small_run();
    let dir = tempfile::tempdir().unwrap();
    write_trajectory(&traj, dir.path()).unwrap();
    let data = dir.path().join("snapshots/snap_000000.f64");
    let bytes = fs::read(&data).unwrap();
    fs::write(&data, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(
        read_trajectory(dir.path()),
        Err(Error::GridMismatch(_))
    ));
}

#[test]
fn missing_directory_and_bad_header() {
    assert!(matches!(
        read_trajectory("/no/such/dir"),
        Err(Error::Io { .. })
    ));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "time,dt\n0.0,0.1\n").unwrap();
    assert!(matches!(read_scalars_csv(&path), Err(Error::Format(_))));
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            landau_core::io::parse_config(&path).unwrap();
            count += 1;
        }
    }
    assert!(count >= 3);
}
