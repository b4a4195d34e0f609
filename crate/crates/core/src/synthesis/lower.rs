use super::shannon::{synthesize_gates, MAX_SHANNON_QUBITS};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Replaces every opaque gate by an elementary sequence on its qubits.
/// Elementary gates pass through unchanged.
pub fn lower_circuit(c: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(c.n_qubits);
    out.measured = c.measured;
    for g in &c.gates {
        match g {
            Gate::Opaque { qubits, matrix } => {
                if qubits.len() > MAX_SHANNON_QUBITS {
                    return Err(Error::TooManyQubits { got: qubits.len(), max: MAX_SHANNON_QUBITS });
                }
                out.gates.extend(synthesize_gates(matrix, qubits)?);
            }
            _ => out.gates.push(g.clone()),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::circuit_unitary;
    use crate::linalg::{haar_random_unitary, phase_invariant_distance};
    use crate::rng::RngStream;
    use crate::workloads::random_circuit;

    #[test]
    fn elementary_circuits_are_unchanged() {
        let mut rng = RngStream::new(71, 0);
        let c = random_circuit(4, 30, &mut rng);
        assert_eq!(lower_circuit(&c).unwrap(), c);
        let once = lower_circuit(&c).unwrap();
        assert_eq!(lower_circuit(&once).unwrap(), once);
    }

    #[test]
    fn two_qubit_opaque_on_distant_qubits() {
        let mut rng = RngStream::new(72, 0);
        let mut c = Circuit::new(4);
        c.opaque(&[1, 3], haar_random_unitary(4, &mut rng).unwrap()).unwrap();
        let low = lower_circuit(&c).unwrap();
        assert!(low.is_elementary());
        assert!(low.cx_count() <= 3);
        assert!(low.gates.iter().all(|g| g.qubits().iter().all(|q| *q == 1 || *q == 3)));
        let d = phase_invariant_distance(&circuit_unitary(&c).unwrap(), &circuit_unitary(&low).unwrap())
            .unwrap();
        assert!(d < 1e-7 * 2.0);
    }

    #[test]
    fn mixed_opaque_sizes() {
        let mut rng = RngStream::new(73, 0);
        let mut c = random_circuit(5, 10, &mut rng);
        c.opaque(&[4], haar_random_unitary(2, &mut rng).unwrap()).unwrap();
        c.opaque(&[3, 0, 2], haar_random_unitary(8, &mut rng).unwrap()).unwrap();
        c.opaque(&[2, 4], haar_random_unitary(4, &mut rng).unwrap()).unwrap();
        c.measured = true;
        let low = lower_circuit(&c).unwrap();
        assert!(low.is_elementary() && low.measured);
        let d = phase_invariant_distance(&circuit_unitary(&c).unwrap(), &circuit_unitary(&low).unwrap())
            .unwrap();
        assert!(d < 1e-7 * 4.0);
    }
}
