//! Instance I/O, random instance families, benchmarking and profiles.

pub mod bench;
pub mod diagnose;
pub mod generate;
pub mod json;
pub mod mps;
pub mod profiles;

use std::path::Path;

use thiserror::Error;

use crate::bruteforce::EnumerationError;
use crate::model::{MiblpInstance, ModelError};
use crate::simplex::LpError;

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("MPS line {line}: {message}")]
    Mps { line: usize, message: String },
    #[error("AUX line {line}: {message}")]
    Aux { line: usize, message: String },
    #[error("JSON error at `{path}`: {message}")]
    Json { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("{0}")]
    Invalid(String),
}

pub(crate) fn read_file(path: &Path) -> Result<String, FrontendError> {
    std::fs::read_to_string(path).map_err(|source| FrontendError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), FrontendError> {
    std::fs::write(path, contents).map_err(|source| FrontendError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads an instance from a `.json` file or an MPS file with its AUX file.
///
/// Without an explicit AUX path, a file with the same stem and extension
/// `.aux` next to the MPS file is used.
pub fn load_instance(path: &Path, aux: Option<&Path>, aux_one_based: bool) -> Result<MiblpInstance, FrontendError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    if ext == "json" {
        return json::parse_json(path);
    }
    let default_aux = path.with_extension("aux");
    let aux = aux.unwrap_or(&default_aux);
    let options = mps::AuxOptions { one_based: aux_one_based };
    mps::parse_mps_aux(path, aux, &options)
}
