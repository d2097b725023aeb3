//! Staged outputs: everything is kept in memory until the run succeeds,
//! then each file is written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl OutputSet {
    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.files.push((path.into(), bytes.into()));
    }

    pub fn files(&self) -> impl Iterator<Item = (&Path, &[u8])> {
        self.files.iter().map(|(p, b)| (p.as_path(), b.as_slice()))
    }

    /// Writes every staged file. Temporary files are created first for all
    /// outputs; renames only start once all of them are written.
    pub fn commit(self) -> Result<(), CliError> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, bytes) in &self.files {
            let err = |source| CliError::Output {
                path: path.clone(),
                source,
            };
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            std::fs::create_dir_all(&dir).map_err(err)?;
            let mut tmp = tempfile::Builder::new()
                .prefix(".docspan-")
                .tempfile_in(&dir)
                .map_err(err)?;
            tmp.write_all(bytes).map_err(err)?;
            tmp.as_file().sync_all().map_err(err)?;
            staged.push((tmp, path.clone()));
        }
        for (tmp, path) in staged {
            tmp.persist(&path).map_err(|e| CliError::Output {
                path: path.clone(),
                source: e.error,
            })?;
        }
        Ok(())
    }
}
