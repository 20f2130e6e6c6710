//! Output directories are assembled in a sibling staging directory and
//! renamed into place once everything, manifest included, has been written.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or settings; exit code 1.
    Usage(String),
    /// Unreadable or invalid data; exit code 2.
    Data(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<citelens_core::Error> for CliError {
    fn from(e: citelens_core::Error) -> Self {
        use citelens_core::Error as E;
        match e {
            E::InvalidConfig(_) | E::InvalidWindow { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: String,
    pub tool_version: String,
    pub config_sha256: String,
    /// Input path -> SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
}

pub struct Staging {
    target: PathBuf,
    dir: PathBuf,
    force: bool,
    files: Vec<String>,
    committed: bool,
}

impl Staging {
    pub fn create(target: &Path, force: bool) -> Result<Self, CliError> {
        if target.exists() {
            if !target.is_dir() {
                return Err(CliError::Usage(format!("{} exists and is not a directory", target.display())));
            }
            if !force {
                return Err(CliError::Usage(format!(
                    "{} already exists; pass --force to replace it",
                    target.display()
                )));
            }
        }
        let name = target
            .file_name()
            .ok_or_else(|| CliError::Usage(format!("invalid output directory {}", target.display())))?
            .to_string_lossy()
            .into_owned();
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(|e| io_error(&parent, e))?;
        let dir = parent.join(format!(".{name}.staging-{}", std::process::id()));
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        }
        fs::create_dir(&dir).map_err(|e| io_error(&dir, e))?;
        Ok(Staging {
            target: target.to_path_buf(),
            dir,
            force,
            files: Vec::new(),
            committed: false,
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_error(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn commit(mut self, manifest: &RunManifest) -> Result<(), CliError> {
        self.write_json("manifest.json", manifest)?;
        if self.target.exists() {
            debug_assert!(self.force);
            fs::remove_dir_all(&self.target).map_err(|e| io_error(&self.target, e))?;
        }
        fs::rename(&self.dir, &self.target).map_err(|e| io_error(&self.target, e))?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.dir);
        }
    }
}

/// Makes a class label usable inside a file name.
pub fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '+' { c } else { '_' })
        .collect()
}
