//! Config files and trajectory persistence.
//!
//! A trajectory directory holds
//!
//! * `trajectory.txt`: `key = value` lines with `n`, `L`, `p` and, for an
//!   aborted run, `abort_time`, `abort_step`, `abort_reason`;
//! * `scalars.csv`: one row per recorded step, columns
//!   `time, dt, mass, momentum_x, momentum_y, momentum_z, energy, entropy,
//!   lp_p, linf_h, grad_energy, c0`;
//! * `snapshots/snap_NNNNNN.f64`: `n³` little-endian `f64` values in
//!   row-major order (`v₁` slowest), each with a `snap_NNNNNN.txt` sidecar
//!   recording `n`, `L` and `time`.
//!
//! Floats are written in shortest round-trip form, so reading back is
//! bit-exact.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::solver::{Abort, SimConfig, Snapshot, StepScalars, Trajectory};

pub const SCALAR_COLUMNS: [&str; 12] = [
    "time",
    "dt",
    "mass",
    "momentum_x",
    "momentum_y",
    "momentum_z",
    "energy",
    "entropy",
    "lp_p",
    "linf_h",
    "grad_energy",
    "c0",
];

/// Parses and validates a TOML config. Unknown keys are rejected.
pub fn parse_config_str(text: &str) -> Result<SimConfig> {
    let config: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

pub fn config_to_toml(config: &SimConfig) -> String {
    toml::to_string(config).expect("config serializes")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_key_values(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("{}: bad line {line:?}", path.display())))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn get<T: std::str::FromStr>(map: &HashMap<String, String>, key: &str, path: &Path) -> Result<T> {
    map.get(key)
        .ok_or_else(|| Error::Format(format!("{}: missing key {key}", path.display())))?
        .parse()
        .map_err(|_| Error::Format(format!("{}: bad value for {key}", path.display())))
}

fn snapshot_paths(dir: &Path, i: usize) -> (PathBuf, PathBuf) {
    let base = dir.join("snapshots");
    (
        base.join(format!("snap_{i:06}.f64")),
        base.join(format!("snap_{i:06}.txt")),
    )
}

/// Writes the scalar table alone.
pub fn write_scalars_csv(scalars: &[StepScalars], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SCALAR_COLUMNS)?;
    for s in scalars {
        let row = [
            s.time,
            s.dt,
            s.mass,
            s.momentum[0],
            s.momentum[1],
            s.momentum[2],
            s.energy,
            s.entropy,
            s.lp_p,
            s.linf_h,
            s.grad_energy,
            s.c0,
        ];
        w.write_record(row.iter().map(|x| format!("{x:?}")))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_scalars_csv(path: impl AsRef<Path>) -> Result<Vec<StepScalars>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != SCALAR_COLUMNS {
        return Err(Error::Format(format!(
            "{}: unexpected header {header:?}",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let x = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::Format(format!("{}: bad number {s:?}", path.display())))
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(StepScalars {
            time: x[0],
            dt: x[1],
            mass: x[2],
            momentum: [x[3], x[4], x[5]],
            energy: x[6],
            entropy: x[7],
            lp_p: x[8],
            linf_h: x[9],
            grad_energy: x[10],
            c0: x[11],
        });
    }
    Ok(out)
}

pub fn write_snapshot(field: &Field, time: f64, data: &Path, sidecar: &Path) -> Result<()> {
    let g = field.grid();
    let mut bytes = Vec::with_capacity(8 * g.len());
    for x in field.values() {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    write_file(data, &bytes)?;
    write_file(
        sidecar,
        format!("n = {}\nL = {:?}\ntime = {time:?}\n", g.n(), g.extent()).as_bytes(),
    )
}

/// Reads one snapshot and checks it against `grid`.
pub fn read_snapshot(grid: &Grid, data: &Path, sidecar: &Path) -> Result<Snapshot> {
    let meta = read_key_values(sidecar)?;
    let n: usize = get(&meta, "n", sidecar)?;
    let extent: f64 = get(&meta, "L", sidecar)?;
    let time: f64 = get(&meta, "time", sidecar)?;
    if n != grid.n() || extent != grid.extent() {
        return Err(Error::GridMismatch(format!(
            "{}: snapshot grid (n = {n}, L = {extent}) differs from trajectory (n = {}, L = {})",
            sidecar.display(),
            grid.n(),
            grid.extent()
        )));
    }
    let bytes = fs::read(data).map_err(|e| Error::io(data, e))?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::GridMismatch(format!(
            "{}: {} bytes, expected {} for n = {}",
            data.display(),
            bytes.len(),
            8 * grid.len(),
            grid.n()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Snapshot {
        time,
        f: Field::from_values(*grid, values)?,
    })
}

pub fn write_trajectory(traj: &Trajectory, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let snaps = dir.join("snapshots");
    fs::create_dir_all(&snaps).map_err(|e| Error::io(&snaps, e))?;
    let mut meta = format!(
        "n = {}\nL = {:?}\np = {:?}\n",
        traj.grid.n(),
        traj.grid.extent(),
        traj.p
    );
    if let Some(a) = &traj.abort {
        meta.push_str(&format!(
            "abort_time = {:?}\nabort_step = {}\nabort_reason = {}\n",
            a.time,
            a.step,
            a.reason.replace('\n', " ")
        ));
    }
    write_file(&dir.join("trajectory.txt"), meta.as_bytes())?;
    write_scalars_csv(&traj.scalars, dir.join("scalars.csv"))?;
    for (i, s) in traj.snapshots.iter().enumerate() {
        let (data, side) = snapshot_paths(dir, i);
        write_snapshot(&s.f, s.time, &data, &side)?;
    }
    Ok(())
}

pub fn read_trajectory(dir: impl AsRef<Path>) -> Result<Trajectory> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let meta_path = dir.join("trajectory.txt");
    let meta = read_key_values(&meta_path)?;
    let grid = Grid::new(get(&meta, "n", &meta_path)?, get(&meta, "L", &meta_path)?)?;
    let p: f64 = get(&meta, "p", &meta_path)?;
    let abort = match meta.get("abort_time") {
        Some(_) => Some(Abort {
            time: get(&meta, "abort_time", &meta_path)?,
            step: get(&meta, "abort_step", &meta_path)?,
            reason: meta.get("abort_reason").cloned().unwrap_or_default(),
        }),
        None => None,
    };
    let scalars = read_scalars_csv(dir.join("scalars.csv"))?;
    let mut snapshots = Vec::new();
    for i in 0.. {
        let (data, side) = snapshot_paths(dir, i);
        if !side.exists() {
            break;
        }
        snapshots.push(read_snapshot(&grid, &data, &side)?);
    }
    Ok(Trajectory {
        grid,
        p,
        scalars,
        snapshots,
        abort,
    })
}
