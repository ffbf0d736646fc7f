//! Run manifests: what was run, on which inputs, producing which outputs.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_file(path: &Path) -> io::Result<String> {
    Ok(format!("{:x}", Sha256::digest(fs::read(path)?)))
}

fn digests(paths: &[PathBuf]) -> io::Result<Value> {
    paths
        .iter()
        .map(|p| Ok(json!({"path": p.display().to_string(), "sha256": sha256_file(p)?})))
        .collect::<io::Result<Vec<_>>>()
        .map(Value::Array)
}

/// Where the manifest for a run whose main output is `out` goes.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub struct RunRecord<'a> {
    pub subcommand: &'a str,
    pub args: Vec<String>,
    pub params: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub elapsed: Duration,
}

impl RunRecord<'_> {
    pub fn to_json(&self) -> io::Result<Value> {
        let cwd = std::env::current_dir()?;
        Ok(json!({
            "tool": "rei",
            "version": TOOL_VERSION,
            "subcommand": self.subcommand,
            "args": self.args,
            "cwd": cwd.display().to_string(),
            "params": self.params,
            "seed": self.seed,
            "inputs": digests(&self.inputs)?,
            "outputs": digests(&self.outputs)?,
            "wall_clock_seconds": self.elapsed.as_secs_f64(),
        }))
    }

    pub fn write(&self) -> io::Result<PathBuf> {
        let path = manifest_path(&self.outputs[0]);
        let mut text = serde_json::to_string_pretty(&self.to_json()?).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// A file digest recorded in a manifest.
pub struct Recorded {
    pub path: PathBuf,
    pub sha256: String,
}

pub fn recorded(manifest: &Value, key: &str) -> Option<Vec<Recorded>> {
    manifest
        .get(key)?
        .as_array()?
        .iter()
        .map(|e| {
            Some(Recorded {
                path: PathBuf::from(e.get("path")?.as_str()?),
                sha256: e.get("sha256")?.as_str()?.to_string(),
            })
        })
        .collect()
}
