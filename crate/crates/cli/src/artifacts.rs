//! Output directory bookkeeping: every file written is hashed into the
//! summary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SUMMARY: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub command: String,
    /// Preset name or problem-file name; never a full path.
    pub input: String,
    pub exit_code: i32,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub results: serde_json::Value,
    /// File name to sha256 of its contents.
    pub files: BTreeMap<String, String>,
}

pub struct Artifacts {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        fs::write(self.dir.join(name), contents)?;
        self.files.insert(name.to_string(), sha256_hex(contents.as_bytes()));
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn files(&self) -> &BTreeMap<String, String> {
        &self.files
    }

    /// Write `summary.json` listing every file produced so far.
    pub fn finish(&self, mut summary: Summary) -> Result<Summary, CliError> {
        summary.files = self.files.clone();
        let mut text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Usage(e.to_string()))?;
        text.push('\n');
        fs::write(self.dir.join(SUMMARY), text)?;
        Ok(summary)
    }
}
