//! Run manifests: what ran, with which inputs, and the content hashes of
//! everything it produced. Written atomically at the end of a run.

use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub seed: u64,
    pub git_describe: String,
    pub started: u64,
    finished: Option<u64>,
    outputs: Vec<(PathBuf, String)>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".to_string())
}

impl RunManifest {
    pub fn start(command: &str, config_path: Option<&Path>, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            config_path: config_path
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "-".to_string()),
            seed,
            git_describe: git_describe(),
            started: unix_now(),
            finished: None,
            outputs: Vec::new(),
        }
    }

    /// Record an output file and hash its current content.
    pub fn add_output(&mut self, path: &Path) -> std::io::Result<()> {
        let bytes = std::fs::read(path)?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.outputs.push((path.to_path_buf(), hex));
        Ok(())
    }

    /// Write the manifest next to the outputs; atomic via temp + rename.
    pub fn finish(mut self, dir: &Path) -> std::io::Result<PathBuf> {
        self.finished = Some(unix_now());
        let mut text = String::new();
        text.push_str(&format!("manifest_schema = {MANIFEST_SCHEMA_VERSION}\n"));
        text.push_str(&format!("command = {}\n", self.command));
        text.push_str(&format!("config_path = {}\n", self.config_path));
        text.push_str(&format!("seed = {}\n", self.seed));
        text.push_str(&format!("git_describe = {}\n", self.git_describe));
        text.push_str(&format!("started = {}\n", self.started));
        text.push_str(&format!("finished = {}\n", self.finished.unwrap_or(0)));
        for (path, hash) in &self.outputs {
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().to_string())
                .unwrap_or_else(|| path.display().to_string());
            text.push_str(&format!("output = {name} sha256:{hash}\n"));
        }
        let tmp = dir.join(".manifest.tmp");
        std::fs::write(&tmp, text)?;
        let target = dir.join("manifest.txt");
        std::fs::rename(&tmp, &target)?;
        Ok(target)
    }
}
