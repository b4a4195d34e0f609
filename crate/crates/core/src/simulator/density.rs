//! Density-matrix evolution.
//!
//! [`exact_density`] is the reference: dense `2^n × 2^n` matrices, embedded
//! gate unitaries and the depolarizing channel written out as its Pauli-Kraus
//! sum. [`density_probabilities`] is the working backend: the density matrix
//! is vectorised (`v[r | c << n] = ρ_rc`), gates act with `U` on the row bits
//! and `conj(U)` on the column bits, and the channel is applied through its
//! partial-trace form.

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{embed, paulis, ComplexMatrix, C64, ONE, ZERO};
use crate::simulator::statevector::{apply_gate_conj_shifted, apply_gate_shifted};
use crate::simulator::NoiseModel;

/// Register limit of the Kraus-sum reference.
pub const MAX_EXACT_QUBITS: usize = 6;

/// Register limit of the vectorised backend.
pub const MAX_DENSITY_QUBITS: usize = 10;

fn noise_rate(noise: &NoiseModel, g: &Gate) -> Result<f64> {
    match g {
        Gate::Opaque { .. } => Err(Error::NotElementary),
        _ => Ok(noise.rate(g.num_qubits())),
    }
}

/// Diagonal of the final density matrix, by explicit Kraus operators.
pub fn exact_density(c: &Circuit, noise: &NoiseModel) -> Result<Vec<f64>> {
    let n = c.n_qubits;
    if n > MAX_EXACT_QUBITS {
        return Err(Error::TooManyQubits { got: n, max: MAX_EXACT_QUBITS });
    }
    let dim = 1 << n;
    let mut rho = ComplexMatrix::zeros(dim);
    rho[(0, 0)] = ONE;
    for g in &c.gates {
        let p = noise_rate(noise, g)?;
        let qs = g.qubits();
        let u = embed(&g.matrix(), &qs, n)?;
        rho = u.mul(&rho).mul(&u.adjoint());
        if p > 0.0 {
            let k = qs.len();
            let terms = 1usize << (2 * k);
            let w = p / terms as f64;
            let mut next = rho.scale(C64::new(1.0 - p + w, 0.0));
            for idx in 1..terms {
                let mut pauli = ComplexMatrix::identity(1);
                for i in (0..k).rev() {
                    pauli = pauli.kron(&paulis::by_index(idx >> (2 * i)));
                }
                let big = embed(&pauli, &qs, n)?;
                next = next.add(&big.mul(&rho).mul(&big).scale(C64::new(w, 0.0)));
            }
            rho = next;
        }
    }
    Ok((0..dim).map(|i| rho[(i, i)].re).collect())
}

/// Replaces `ρ` by `(1 − p) ρ + p Tr_S(ρ) ⊗ I/2^k` on qubits `S`.
fn depolarize(v: &mut [C64], n: usize, qubits: &[usize], p: f64) {
    let sub = 1usize << qubits.len();
    let row_offsets: Vec<usize> = (0..sub)
        .map(|a| {
            qubits
                .iter()
                .enumerate()
                .filter(|(bit, _)| a >> bit & 1 == 1)
                .map(|(_, &q)| 1usize << q)
                .sum()
        })
        .collect();
    let row_mask = row_offsets[sub - 1];
    let mask = row_mask | row_mask << n;
    let keep = 1.0 - p;
    let mix = p / sub as f64;
    for base in 0..v.len() {
        if base & mask != 0 {
            continue;
        }
        let tr: C64 = row_offsets.iter().map(|&o| v[base | o | o << n]).sum();
        for (a, &ra) in row_offsets.iter().enumerate() {
            for (b, &rb) in row_offsets.iter().enumerate() {
                let idx = base | ra | rb << n;
                v[idx] *= keep;
                if a == b {
                    v[idx] += tr * mix;
                }
            }
        }
    }
}

/// Exact output distribution under `noise` using the vectorised density
/// matrix.
pub fn density_probabilities(c: &Circuit, noise: &NoiseModel) -> Result<Vec<f64>> {
    let n = c.n_qubits;
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::TooManyQubits { got: n, max: MAX_DENSITY_QUBITS });
    }
    let mut v = vec![ZERO; 1 << (2 * n)];
    v[0] = ONE;
    for g in &c.gates {
        let p = noise_rate(noise, g)?;
        apply_gate_shifted(&mut v, g, 0);
        apply_gate_conj_shifted(&mut v, g, n);
        if p > 0.0 {
            depolarize(&mut v, n, &g.qubits(), p);
        }
    }
    Ok((0..1usize << n).map(|r| v[r | r << n].re.max(0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::simulator::ideal_probabilities;
    use crate::workloads::random_circuit;

    #[test]
    fn noiseless_matches_statevector() {
        let mut rng = RngStream::new(31, 0);
        let c = random_circuit(4, 40, &mut rng);
        let ideal = ideal_probabilities(&c).unwrap();
        let exact = exact_density(&c, &NoiseModel::noiseless()).unwrap();
        let fast = density_probabilities(&c, &NoiseModel::noiseless()).unwrap();
        for i in 0..16 {
            assert!((ideal[i] - exact[i]).abs() < 1e-12);
            assert!((ideal[i] - fast[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_channel_is_analytic() {
        // E(ρ) = (1 − p) ρ + p I/2 on |0⟩⟨0| gives ⟨Z⟩ = 1 − p
        let mut c = Circuit::new(1);
        c.u3(0.0, 0.0, 0.0, 0).unwrap();
        let p = 0.3;
        let probs = exact_density(&c, &NoiseModel::new(p, 0.0).unwrap()).unwrap();
        assert!((probs[0] - probs[1] - (1.0 - p)).abs() < 1e-14);
    }

    #[test]
    fn bell_with_noisy_cx_matches_hand_kraus_sum() {
        // After H, ρ = |+0⟩⟨+0|; CX maps it to the Bell projector Φ.
        // Each of the 15 non-identity Paulis maps Φ to a Bell projector:
        // Φ+ is kept by XX, YY, ZZ; the other 12 spread evenly over the
        // remaining three Bell states. Diagonal of (1 − p + p/16) Φ + (p/16) ΣPΦP:
        let p = 0.1;
        let w = p / 16.0;
        let keep = 1.0 - p + w + 3.0 * w;
        // the 12 remaining Paulis, 4 per Bell state Ψ+, Ψ−, Φ−
        let other = 4.0 * w;
        // Φ± put 1/2 on |00⟩,|11⟩; Ψ± put 1/2 on |01⟩,|10⟩
        let p00 = 0.5 * keep + 0.5 * other;
        let p01 = 0.5 * (2.0 * other);
        let mut c = Circuit::new(2);
        c.h(0).unwrap().cx(0, 1).unwrap();
        let noise = NoiseModel::new(0.0, p).unwrap();
        let probs = exact_density(&c, &noise).unwrap();
        let want = [p00, p01, p01, p00];
        for i in 0..4 {
            assert!((probs[i] - want[i]).abs() < 1e-14, "{i}: {} vs {}", probs[i], want[i]);
        }
        let fast = density_probabilities(&c, &noise).unwrap();
        for i in 0..4 {
            assert!((fast[i] - want[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn fast_route_matches_kraus_sum() {
        let mut rng = RngStream::new(32, 0);
        for &p in &[0.01, 0.1, 0.5] {
            let c = random_circuit(4, 30, &mut rng);
            let noise = NoiseModel::new(p, 1.5 * p).unwrap();
            let exact = exact_density(&c, &noise).unwrap();
            let fast = density_probabilities(&c, &noise).unwrap();
            for i in 0..16 {
                assert!((exact[i] - fast[i]).abs() < 1e-12);
            }
            assert!((fast.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn register_limits() {
        let c = Circuit::new(7);
        assert!(matches!(
            exact_density(&c, &NoiseModel::noiseless()),
            Err(Error::TooManyQubits { .. })
        ));
        assert!(density_probabilities(&c, &NoiseModel::noiseless()).is_ok());
    }
}
