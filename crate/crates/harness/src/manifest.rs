//! `manifest.txt`: one `key = value` per line, written next to the
//! artifacts of a run. Together with the saved `config.toml` it is enough to
//! repeat the run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub const FILE_NAME: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

/// Hex SHA-256 of the canonical config text.
pub fn config_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

impl Manifest {
    pub fn new() -> Self {
        let mut m = Manifest::default();
        m.push("tool", env!("CARGO_PKG_NAME"));
        m.push("tool_version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace('\n', " ");
        self.entries.push((key.to_string(), value));
    }

    /// First value stored under `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries.iter().filter(move |(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(text: &str) -> Option<Self> {
        let mut m = Manifest::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once(" = ")?;
            m.entries.push((k.to_string(), v.to_string()));
        }
        Some(m)
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join(FILE_NAME);
        std::fs::write(&path, self.to_text())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_sha256_hex() {
        assert_eq!(
            config_hash(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn text_round_trip() {
        let mut m = Manifest::new();
        m.push("seed", 7);
        m.push("artifact", "a.csv");
        m.push("artifact", "a.svg");
        let back = Manifest::parse(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.get("seed"), Some("7"));
        assert_eq!(back.get_all("artifact").count(), 2);
    }
}
