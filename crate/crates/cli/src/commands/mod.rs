pub mod benchmark;
pub mod generate;
pub mod unoptimize;
pub mod verify;
pub mod zne;

use std::fs;
use std::path::Path;

use unopt_core::circuit::from_qasm;
use unopt_core::Circuit;

use crate::error::{CliError, CliResult};

pub fn read_qasm(path: &Path) -> CliResult<(String, Circuit)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    let c = from_qasm(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((text, c))
}

/// Refuses to write `target` when it is one of the `inputs`.
pub fn guard_inputs(target: &Path, inputs: &[&Path]) -> CliResult<()> {
    let Ok(t) = target.canonicalize() else {
        return Ok(());
    };
    for input in inputs {
        if input.canonicalize().is_ok_and(|i| i == t) {
            return Err(CliError::Input(format!("refusing to overwrite input file {}", input.display())));
        }
    }
    Ok(())
}

/// Writes `contents` to `out`, or to standard output when `out` is absent.
pub fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, contents).map_err(|e| CliError::write(p, e)),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}
