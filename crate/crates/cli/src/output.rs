use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::CliError;

/// Collects the files of one run under a single directory.
pub struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn csv<R, I, S>(&mut self, name: &str, header: &[&str], rows: R) -> Result<(), CliError>
    where
        R: IntoIterator<Item = I>,
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        self.written.push(path);
        Ok(())
    }

    /// `<command>_manifest.csv`: the resolved configuration, the seed and
    /// the tool version.
    pub fn manifest(&mut self, command: &str, cfg: &RunConfig) -> Result<(), CliError> {
        let mut rows = vec![
            ("command".to_string(), command.to_string()),
            ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ];
        rows.extend(cfg.entries());
        self.csv(&format!("{command}_manifest.csv"), &["key", "value"], rows.into_iter().map(|(k, v)| [k, v]))
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
