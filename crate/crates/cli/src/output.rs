//! All-or-nothing file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tempfile::NamedTempFile;

/// Files staged next to their destinations and moved into place together.
#[derive(Default)]
pub struct Outputs {
    staged: Vec<(NamedTempFile, PathBuf)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: impl AsRef<Path>, contents: &str) -> Result<()> {
        let path = path.as_ref();
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = NamedTempFile::new_in(dir)
            .with_context(|| format!("cannot create a file in {}", dir.display()))?;
        tmp.write_all(contents.as_bytes())
            .with_context(|| format!("writing {}", path.display()))?;
        self.staged.push((tmp, path.to_path_buf()));
        Ok(())
    }

    /// Moves every staged file into place. If one move fails, files already
    /// moved by this call are removed.
    pub fn commit(self) -> Result<()> {
        let mut done: Vec<PathBuf> = Vec::new();
        for (tmp, path) in self.staged {
            if let Err(e) = tmp.persist(&path) {
                for p in &done {
                    let _ = std::fs::remove_file(p);
                }
                return Err(e.error).with_context(|| format!("writing {}", path.display()));
            }
            done.push(path);
        }
        Ok(())
    }
}

pub fn write_one(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let mut out = Outputs::new();
    out.add(path, contents)?;
    out.commit()
}

/// Fails unless `path` names an existing file.
pub fn require_file(path: &Path, what: &str) -> Result<()> {
    anyhow::ensure!(path.is_file(), "{what} `{}` does not exist", path.display());
    Ok(())
}
