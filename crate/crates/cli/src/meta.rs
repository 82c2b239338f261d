use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliResult;

/// `key = value` record of every effective setting of a run, written next
/// to its main output.
#[derive(Default)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str) -> Self {
        let mut m = Self::default();
        m.push("command", command);
        m.push("version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Appends pre-rendered `key = value` lines.
    pub fn push_block(&mut self, block: &str) {
        for line in block.lines() {
            if let Some((k, v)) = line.split_once('=') {
                self.push(k.trim(), v.trim());
            }
        }
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn write_next_to(&self, output: &Path) -> CliResult<PathBuf> {
        let path = meta_path(output);
        fs::write(&path, self.render())?;
        Ok(path)
    }
}

pub fn meta_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}
