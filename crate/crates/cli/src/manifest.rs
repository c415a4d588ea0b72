use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Engine, ExperimentConfig};
use crate::error::{CliError, CliResult};

pub const MANIFEST_FORMAT: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// Relative to the run directory.
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

impl OutputRecord {
    pub fn of(dir: &Path, file: &str) -> CliResult<Self> {
        let path = dir.join(file);
        let data = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(Self { file: file.to_string(), bytes: data.len() as u64, sha256: hex::encode(Sha256::digest(&data)) })
    }
}

/// Everything needed to repeat a run and check that it reproduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub manifest_format: u32,
    pub tool: String,
    pub version: String,
    pub engine: Engine,
    /// The resolved configuration, with the rate table inlined.
    pub config: ExperimentConfig,
    pub wall_clock_seconds: f64,
    pub summary: serde_json::Value,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn from_json_str(s: &str) -> CliResult<Self> {
        serde_json::from_str(s).map_err(|e| CliError::Config(format!("manifest: {e}")))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn output(&self, file: &str) -> Option<&OutputRecord> {
        self.outputs.iter().find(|o| o.file == file)
    }

    /// Files whose current hash differs from the recorded one.
    pub fn verify(&self, dir: &Path) -> CliResult<Vec<String>> {
        let mut changed = Vec::new();
        for o in &self.outputs {
            if OutputRecord::of(dir, &o.file)? != *o {
                changed.push(o.file.clone());
            }
        }
        Ok(changed)
    }
}
