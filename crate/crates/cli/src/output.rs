use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Output directory plus the format echoed on stdout: the JSON summary or
/// the command's main CSV table.
#[derive(Debug, Clone)]
pub struct Output {
    dir: PathBuf,
    format: Format,
}

impl Output {
    pub fn new(dir: PathBuf, format: Format) -> Self {
        Self { dir, format }
    }

    /// Same format, different directory.
    pub fn nested(&self, name: &str) -> Self {
        Self { dir: self.dir.join(name), format: self.format }
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::create_dir_all(&self.dir)?;
        fs::write(self.dir.join(name), bytes)?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<Vec<u8>, CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
        bytes.push(b'\n');
        self.write(name, &bytes)?;
        Ok(bytes)
    }

    /// Prints whichever of the two artifacts matches the requested format.
    pub fn echo(&self, csv: &[u8], json: &[u8]) -> Result<(), CliError> {
        let mut out = io::stdout().lock();
        out.write_all(if self.format == Format::Csv { csv } else { json })?;
        Ok(())
    }
}

/// Renders a CSV writer into memory.
pub fn render<F>(f: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Summary wrapper that records the resolved settings for reproduction.
#[derive(Serialize)]
pub struct Summary<'a, R: Serialize, C: Serialize> {
    pub command: &'a str,
    #[serde(flatten)]
    pub result: R,
    pub config: &'a C,
}
