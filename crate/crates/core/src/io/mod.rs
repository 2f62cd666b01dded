//! Case files, simulation output and model documentation.

mod case;
mod matpower;
mod output;
mod radial;

pub use case::{build_system, load_case, BuildOptions, CaseFile, Row, STORED_TABLES};
pub use matpower::{load_matpower, parse_matpower};
pub use output::{export_model_docs, tds_csv, write_eigen_csv, write_tds_csv, pf_json};
pub use radial::radial_case;

use crate::numeric::NumericError;
use crate::symbolic::SchemaError;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{model}{}: {message}", if field.is_empty() { String::new() } else { format!(".{field}") })]
    Schema { model: String, field: String, message: String },
    #[error("MATPOWER input, line {line}: {message}")]
    Matpower { line: usize, message: String },
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Model(#[from] SchemaError),
}

pub type Result<T> = std::result::Result<T, IoError>;

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

pub(crate) fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| IoError::File { path: parent.display().to_string(), source })?;
    }
    std::fs::write(path, bytes).map_err(|source| IoError::File { path: path.display().to_string(), source })
}
