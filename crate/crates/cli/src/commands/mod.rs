pub mod analyze;
pub mod landscape;
pub mod run;
pub mod sweep;

use std::fs;
use std::path::Path;

use crate::error::{CliError, CliResult};

pub(crate) fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub(crate) fn write_output(path: &Path, body: &str) -> CliResult<()> {
    fs::write(path, body).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub(crate) fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))
}
