//! File formats, the experiment runner and the `copter` command line on top
//! of [`copter_core`].

pub mod cli;
pub mod config;
pub mod data_io;
pub mod experiment;
pub mod graph_io;
pub mod models;
pub mod report;
pub mod scenario;

use std::path::{Path, PathBuf};

/// Versions of the file formats this build reads and writes.
pub const FORMAT_VERSIONS: &[(&str, u32)] = &[
    ("graph-csv", graph_io::GRAPH_FORMAT_VERSION),
    ("forest-model", copter_core::likelihood::forest::FOREST_FORMAT_VERSION),
    ("choice-model", models::CHOICE_FORMAT_VERSION),
    ("scenario", scenario::SCENARIO_FORMAT_VERSION),
    ("sim-report", experiment::REPORT_FORMAT_VERSION),
];

/// A failure tied to a particular input or output file.
#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{}: {cause}", path.display())]
    Io { path: PathBuf, cause: std::io::Error },
    #[error("{}: line {line}: {reason}", path.display())]
    Parse { path: PathBuf, line: usize, reason: String },
    #[error("{}: {reason}", path.display())]
    Invalid { path: PathBuf, reason: String },
}

impl FileError {
    pub fn io(path: &Path, cause: std::io::Error) -> FileError {
        FileError::Io { path: path.to_path_buf(), cause }
    }

    pub fn invalid(path: &Path, reason: impl ToString) -> FileError {
        FileError::Invalid { path: path.to_path_buf(), reason: reason.to_string() }
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, FileError> {
    std::fs::read_to_string(path).map_err(|e| FileError::io(path, e))
}

pub(crate) fn open(path: &Path) -> Result<std::fs::File, FileError> {
    std::fs::File::open(path).map_err(|e| FileError::io(path, e))
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<(), FileError> {
    std::fs::write(path, contents).map_err(|e| FileError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, FileError> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| FileError::invalid(path, e))
}
