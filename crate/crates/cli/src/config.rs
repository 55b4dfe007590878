//! Config loading, the output-directory override, and output sinks.
//!
//! Every subcommand reads one JSON config whose fields all have defaults, so
//! a missing `--config` means "run the built-in experiment". Unknown fields
//! are rejected: a typo must not silently fall back to a default.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use crate::error::{CliError, Result};

/// Environment variable that redirects any output file into a different
/// directory, keeping the file name.
pub const OUT_DIR_ENV: &str = "SWARM_ESCAPE_OUT_DIR";

pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("parsing {}: {e}", path.display())))
}

/// Apply the directory override to an output path, if one is set.
pub fn resolve_out(out: Option<PathBuf>) -> Result<Option<PathBuf>> {
    let Some(out) = out else {
        return Ok(None);
    };
    let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) else {
        return Ok(Some(out));
    };
    let name = out
        .file_name()
        .ok_or_else(|| CliError::validation(format!("output path {} has no file name", out.display())))?;
    Ok(Some(PathBuf::from(dir).join(name)))
}

/// Sibling path for a second output file: `dir/stem<suffix>.ext`.
pub fn sibling_path(path: &Path, suffix: &str) -> Result<PathBuf> {
    let stem = path
        .file_stem()
        .ok_or_else(|| CliError::validation(format!("output path {} has no file name", path.display())))?;
    let mut name = stem.to_os_string();
    name.push(suffix);
    if let Some(ext) = path.extension() {
        name.push(".");
        name.push(ext);
    }
    Ok(path.with_file_name(name))
}

/// Where a command's table goes: an output file when configured, stdout
/// otherwise.
pub enum Sink {
    File(BufWriter<File>),
    Stdout(io::Stdout),
}

pub fn open_sink(path: Option<&Path>) -> Result<Sink> {
    match path {
        None => Ok(Sink::Stdout(io::stdout())),
        Some(p) => {
            let f = File::create(p)
                .map_err(|e| CliError::io(format!("creating {}: {e}", p.display())))?;
            Ok(Sink::File(BufWriter::new(f)))
        }
    }
}

impl Sink {
    pub fn finish(mut self) -> Result<()> {
        self.flush()?;
        Ok(())
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Self::File(w) => w.write(buf),
            Self::Stdout(w) => w.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Self::File(w) => w.flush(),
            Self::Stdout(w) => w.flush(),
        }
    }
}
