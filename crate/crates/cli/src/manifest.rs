use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use landau_core::{Error, SimConfig, Trajectory};
use serde::Serialize;

/// Seconds since the Unix epoch.
pub fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

#[derive(Serialize)]
pub struct RunManifest {
    pub config: SimConfig,
    pub version: String,
    pub started: f64,
    pub finished: f64,
    pub outputs: Vec<PathBuf>,
    pub abort: Option<String>,
}

impl RunManifest {
    pub fn new(config: &SimConfig, started: f64, dir: &Path, traj: &Trajectory) -> Self {
        let mut outputs = vec![dir.join("trajectory.txt"), dir.join("scalars.csv")];
        if !traj.snapshots.is_empty() {
            outputs.push(dir.join("snapshots"));
        }
        RunManifest {
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started,
            finished: now(),
            outputs,
            abort: traj
                .abort
                .as_ref()
                .map(|a| format!("t = {} (step {}): {}", a.time, a.step, a.reason)),
        }
    }

    /// Writes `manifest.json` via a temporary file and a rename.
    pub fn write(&self, dir: &Path) -> Result<(), Error> {
        let tmp = dir.join("manifest.json.tmp");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        let dest = dir.join("manifest.json");
        fs::rename(&tmp, &dest).map_err(|e| Error::io(&dest, e))
    }
}
