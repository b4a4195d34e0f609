//! In-place gate kernels on little-endian amplitude vectors.
//!
//! The `_shifted` variants add a fixed offset to every qubit index, which
//! lets the same kernels act on the row or column half of a vectorised
//! matrix.

use crate::circuit::{Circuit, Gate};
use crate::linalg::{ComplexMatrix, C64, I, ONE, ZERO};

/// Applies the 2×2 matrix `m` (row-major) to bit `q`.
pub fn apply_1q(state: &mut [C64], q: usize, m: &[C64; 4]) {
    let stride = 1usize << q;
    let [a, b, c, d] = *m;
    for base in (0..state.len()).step_by(2 * stride) {
        for i in base..base + stride {
            let x0 = state[i];
            let x1 = state[i + stride];
            state[i] = a * x0 + b * x1;
            state[i + stride] = c * x0 + d * x1;
        }
    }
}

pub fn apply_cx(state: &mut [C64], control: usize, target: usize) {
    let cm = 1usize << control;
    let tm = 1usize << target;
    for i in 0..state.len() {
        if i & cm != 0 && i & tm == 0 {
            state.swap(i, i | tm);
        }
    }
}

/// Applies a `2^k × 2^k` matrix to `qubits`; `qubits[0]` is the matrix's
/// least significant qubit.
pub fn apply_matrix(state: &mut [C64], qubits: &[usize], m: &ComplexMatrix) {
    let k = qubits.len();
    let dim = 1usize << k;
    debug_assert_eq!(m.dim(), dim);
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let offsets: Vec<usize> = (0..dim)
        .map(|sub| {
            qubits
                .iter()
                .enumerate()
                .filter(|(bit, _)| sub >> bit & 1 == 1)
                .map(|(_, &q)| 1usize << q)
                .sum()
        })
        .collect();
    let mut buf = vec![ZERO; dim];
    for base in 0..state.len() {
        if base & mask != 0 {
            continue;
        }
        for (slot, &off) in buf.iter_mut().zip(&offsets) {
            *slot = state[base | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            state[base | off] = m.row(r).iter().zip(&buf).map(|(x, y)| x * y).sum();
        }
    }
}

pub fn u3_entries(theta: f64, phi: f64, lambda: f64) -> [C64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        C64::new(c, 0.0),
        -C64::from_polar(s, lambda),
        C64::from_polar(s, phi),
        C64::from_polar(c, phi + lambda),
    ]
}

pub fn apply_gate(state: &mut [C64], gate: &Gate) {
    apply_gate_shifted(state, gate, 0);
}

pub fn apply_gate_shifted(state: &mut [C64], gate: &Gate, shift: usize) {
    match gate {
        Gate::U3 { theta, phi, lambda, qubit } => {
            apply_1q(state, qubit + shift, &u3_entries(*theta, *phi, *lambda))
        }
        Gate::Cx { control, target } => apply_cx(state, control + shift, target + shift),
        Gate::Opaque { qubits, matrix } => {
            let qs: Vec<usize> = qubits.iter().map(|q| q + shift).collect();
            apply_matrix(state, &qs, matrix)
        }
    }
}

/// Applies the complex conjugate of the gate, offset by `shift`.
pub fn apply_gate_conj_shifted(state: &mut [C64], gate: &Gate, shift: usize) {
    match gate {
        Gate::U3 { theta, phi, lambda, qubit } => {
            let m = u3_entries(*theta, *phi, *lambda).map(|z| z.conj());
            apply_1q(state, qubit + shift, &m)
        }
        Gate::Cx { control, target } => apply_cx(state, control + shift, target + shift),
        Gate::Opaque { qubits, matrix } => {
            let qs: Vec<usize> = qubits.iter().map(|q| q + shift).collect();
            apply_matrix(state, &qs, &matrix.conj())
        }
    }
}

/// Applies Pauli `p` (0 = I, 1 = X, 2 = Y, 3 = Z) to bit `q`.
pub fn apply_pauli(state: &mut [C64], q: usize, p: usize) {
    let m = 1usize << q;
    match p {
        0 => {}
        1 => {
            for i in 0..state.len() {
                if i & m == 0 {
                    state.swap(i, i | m);
                }
            }
        }
        2 => {
            for i in 0..state.len() {
                if i & m == 0 {
                    let (a, b) = (state[i], state[i | m]);
                    state[i] = -I * b;
                    state[i | m] = I * a;
                }
            }
        }
        _ => {
            for (i, amp) in state.iter_mut().enumerate() {
                if i & m != 0 {
                    *amp = -*amp;
                }
            }
        }
    }
}

pub fn zero_state(n: usize) -> Vec<C64> {
    let mut psi = vec![ZERO; 1 << n];
    psi[0] = ONE;
    psi
}

/// Noiseless final state of `c` from |0…0⟩.
pub fn final_state(c: &Circuit) -> Vec<C64> {
    let mut psi = zero_state(c.n_qubits);
    for g in &c.gates {
        apply_gate(&mut psi, g);
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{embed, haar_random_unitary, paulis};
    use crate::rng::RngStream;

    fn random_state(n: usize, rng: &mut RngStream) -> Vec<C64> {
        let u = haar_random_unitary(1 << n, rng).unwrap();
        (0..1 << n).map(|r| u[(r, 0)]).collect()
    }

    fn dense_apply(state: &[C64], m: &ComplexMatrix) -> Vec<C64> {
        (0..state.len())
            .map(|r| m.row(r).iter().zip(state).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn close(a: &[C64], b: &[C64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn kernels_match_dense_embedding() {
        let mut rng = RngStream::new(21, 0);
        let n = 4;
        let psi = random_state(n, &mut rng);

        let u2 = haar_random_unitary(2, &mut rng).unwrap();
        let mut got = psi.clone();
        let m: [C64; 4] = u2.as_slice().try_into().unwrap();
        apply_1q(&mut got, 2, &m);
        assert!(close(&got, &dense_apply(&psi, &embed(&u2, &[2], n).unwrap())));

        let mut got = psi.clone();
        apply_cx(&mut got, 3, 1);
        let cx = crate::circuit::cx_matrix();
        assert!(close(&got, &dense_apply(&psi, &embed(&cx, &[3, 1], n).unwrap())));

        let u8 = haar_random_unitary(8, &mut rng).unwrap();
        let mut got = psi.clone();
        apply_matrix(&mut got, &[3, 0, 2], &u8);
        assert!(close(&got, &dense_apply(&psi, &embed(&u8, &[3, 0, 2], n).unwrap())));

        for p in 0..4 {
            let mut got = psi.clone();
            apply_pauli(&mut got, 1, p);
            let want = dense_apply(&psi, &embed(&paulis::by_index(p), &[1], n).unwrap());
            assert!(close(&got, &want));
        }
    }
}
