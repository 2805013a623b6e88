//! Per-run manifest: config hash, versions and a hash per written file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::Result;

pub const MANIFEST_NAME: &str = "manifest.toml";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects the files of one run; everything written goes through `write`.
pub struct Manifest {
    dir: PathBuf,
    command: String,
    config_hash: String,
    seed: u64,
    files: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(dir: &Path, command: &str, config_text: &str, seed: u64) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Manifest {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            config_hash: sha256_hex(config_text.as_bytes()),
            seed,
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.path(name), bytes)?;
        self.record(name)
    }

    /// Registers a file some other writer already produced.
    pub fn record(&mut self, name: &str) -> Result<()> {
        let hash = sha256_hex(&fs::read(self.path(name))?);
        self.files.retain(|f| f.0 != name);
        self.files.push((name.to_string(), hash));
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "command = \"{}\"", self.command).unwrap();
        writeln!(s, "config_sha256 = \"{}\"", self.config_hash).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "version = \"{}\"", env!("CARGO_PKG_VERSION")).unwrap();
        for (name, hash) in &self.files {
            writeln!(s, "\n[[file]]\nname = \"{name}\"\nsha256 = \"{hash}\"").unwrap();
        }
        s
    }

    pub fn finish(self) -> Result<PathBuf> {
        let p = self.path(MANIFEST_NAME);
        fs::write(&p, self.render())?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = Manifest::new(dir.path(), "angles", "seed = 1", 1).unwrap();
        m.write("a.csv", b"x\n1\n").unwrap();
        let text = m.render();
        assert!(text.contains(&sha256_hex(b"x\n1\n")));
        assert!(text.contains(&sha256_hex(b"seed = 1")));
        m.finish().unwrap();
        assert!(dir.path().join(MANIFEST_NAME).exists());
    }
}
