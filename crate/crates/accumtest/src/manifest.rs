//! Run manifests: enough to re-execute a command and regenerate its tables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Flags that never influence output bytes, or that name the output
/// location (which replay chooses afresh).
const LOCATION_FLAGS: [&str; 2] = ["--threads", "--out-dir"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Arguments after the subcommand, minus thread count and output dir.
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    /// Output files, relative to the output directory when there is one.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, raw_args: &[String], seed: Option<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            args: strip_location_flags(raw_args),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_json()?)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Command line that reproduces the run (without the program name).
    pub fn replay_args(&self) -> Vec<String> {
        std::iter::once(self.subcommand.clone()).chain(self.args.iter().cloned()).collect()
    }
}

fn strip_location_flags(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip_next = false;
    for a in args {
        if skip_next {
            skip_next = false;
            continue;
        }
        if LOCATION_FLAGS.contains(&a.as_str()) {
            skip_next = true;
        } else if !LOCATION_FLAGS.iter().any(|f| a.starts_with(&format!("{f}="))) {
            out.push(a.clone());
        }
    }
    out
}
