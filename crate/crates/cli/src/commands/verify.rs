use std::path::Path;

use unopt_core::{circuit_unitary, phase_invariant_distance};

use super::read_qasm;
use crate::error::{CliError, CliResult};

pub const MAX_VERIFY_QUBITS: usize = 10;

/// Distance at or above which two circuits count as inequivalent.
pub const VERIFY_TOL: f64 = 1e-5;

pub fn run(a: &Path, b: &Path) -> CliResult<()> {
    let (_, ca) = read_qasm(a)?;
    let (_, cb) = read_qasm(b)?;
    for (path, c) in [(a, &ca), (b, &cb)] {
        if c.n_qubits > MAX_VERIFY_QUBITS {
            return Err(CliError::Precondition(format!(
                "{} has {} qubits; verify supports at most {MAX_VERIFY_QUBITS}",
                path.display(),
                c.n_qubits
            )));
        }
    }
    if ca.n_qubits != cb.n_qubits {
        return Err(CliError::Precondition(format!("qubit counts differ: {} vs {}", ca.n_qubits, cb.n_qubits)));
    }
    let d = phase_invariant_distance(&circuit_unitary(&ca)?, &circuit_unitary(&cb)?)?;
    println!("distance {}", crate::output::fmt_f64(d));
    if d < VERIFY_TOL {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(CliError::NotEquivalent)
    }
}
