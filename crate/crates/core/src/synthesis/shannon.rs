//! Quantum Shannon decomposition for 3 to 5 qubits.
//!
//! With the top (most significant) qubit selecting the block, a cosine-sine
//! decomposition writes
//! `U = (L0 ⊕ L1) · [[C, −S], [S, C]] · (R0 ⊕ R1)`. The middle factor is a
//! Y rotation on the top qubit multiplexed by the lower qubits, and each
//! block-diagonal factor `A0 ⊕ A1` is demultiplexed into
//! `(I ⊗ V) · (D ⊕ D†) · (I ⊗ W)`, where `D ⊕ D†` is a multiplexed Z
//! rotation. Two savings bring the three-qubit count to 20 CX:
//!
//! * the Y multiplexor is built from CZ gates and its final CZ is folded into
//!   `L1`;
//! * for three qubits, every two-qubit block except the last is synthesised
//!   up to a diagonal, which commutes through the following multiplexor into
//!   the next block.

use nalgebra::DMatrix;

use super::kak::{kak_gates, kak_gates_up_to_diagonal};
use super::one_qubit::{ry, rz, u3_gate};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE};

pub const MAX_SHANNON_QUBITS: usize = 5;

/// Unitarity tolerance for multi-qubit inputs.
pub const MULTI_QUBIT_TOL: f64 = 1e-9;

/// Multiplexor angles below this magnitude are treated as zero.
const ANGLE_TOL: f64 = 1e-13;

struct Csd {
    l0: ComplexMatrix,
    l1: ComplexMatrix,
    r0: ComplexMatrix,
    r1: ComplexMatrix,
    theta: Vec<f64>,
}

fn csd(u: &ComplexMatrix) -> Result<Csd> {
    let h = u.dim() / 2;
    let u00 = u.block(0, 0, h).to_nalgebra();
    let u01 = u.block(0, h, h).to_nalgebra();
    let u10 = u.block(h, 0, h).to_nalgebra();
    let u11 = u.block(h, h, h).to_nalgebra();

    let svd = u00.svd(true, true);
    let w = svd.u.ok_or_else(|| Error::Numerical("svd without U".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::Numerical("svd without V".into()))?;
    let mut order: Vec<usize> = (0..h).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let l0 = DMatrix::from_fn(h, h, |r, c| w[(r, order[c])]);
    let r0 = DMatrix::from_fn(h, h, |r, c| vt[(order[r], c)]);
    let cos: Vec<f64> = order.iter().map(|&i| svd.singular_values[i].min(1.0)).collect();

    let t = &u10 * r0.adjoint();
    let qr = t.qr();
    let mut l1 = qr.q();
    let rr = qr.r();
    let mut sin = vec![0.0; h];
    for j in 0..h {
        let d = rr[(j, j)];
        sin[j] = d.norm();
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for r in 0..h {
                l1[(r, j)] *= phase;
            }
        }
    }
    let top = -(l0.adjoint() * &u01);
    let bottom = l1.adjoint() * &u11;
    let r1 = DMatrix::from_fn(h, h, |r, c| {
        if sin[r] > cos[r] {
            top[(r, c)] / sin[r]
        } else {
            bottom[(r, c)] / cos[r]
        }
    });
    let theta = (0..h).map(|j| sin[j].atan2(cos[j])).collect();
    Ok(Csd {
        l0: ComplexMatrix::from_nalgebra(&l0)?,
        l1: ComplexMatrix::from_nalgebra(&l1)?,
        r0: ComplexMatrix::from_nalgebra(&r0)?,
        r1: ComplexMatrix::from_nalgebra(&r1)?,
        theta,
    })
}

/// `a0 ⊕ a1 = (I ⊗ V) · (D ⊕ D†) · (I ⊗ W)`; returns `(V, diag D, W)`.
fn demultiplex(a0: &ComplexMatrix, a1: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<C64>, ComplexMatrix)> {
    let x = a0.mul(&a1.adjoint()).to_nalgebra();
    let (q, t) = x.schur().unpack();
    let d: Vec<C64> = (0..t.nrows()).map(|j| t[(j, j)].sqrt()).collect();
    let v = ComplexMatrix::from_nalgebra(&q)?;
    let w = ComplexMatrix::from_diagonal(&d).mul(&v.adjoint()).mul(a1);
    Ok((v, d, w))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    Y,
    Z,
}

/// Rotation about `axis` on `target` multiplexed by `controls` (bit `i` of
/// the selector is `controls[i]`): `Σ_j |j⟩⟨j| ⊗ R(angles[j])`.
///
/// Uses the Gray-code construction. With `drop_last_cz` the entanglers are
/// CZ gates and the final one is omitted, leaving the circuit equal to the
/// multiplexor followed by `CZ(controls[m−1], target)`. Returns `None` when
/// every angle vanishes.
fn multiplexed_rotation(
    axis: Axis,
    angles: &[f64],
    target: usize,
    controls: &[usize],
    drop_last_cz: bool,
) -> Option<Vec<Gate>> {
    if angles.iter().all(|a| a.abs() < ANGLE_TOL) {
        return None;
    }
    let m = controls.len();
    let count = angles.len();
    debug_assert_eq!(count, 1 << m);
    let gray = |i: usize| i ^ (i >> 1);
    let beta: Vec<f64> = (0..count)
        .map(|i| {
            let g = gray(i);
            angles
                .iter()
                .enumerate()
                .map(|(j, a)| if (j & g).count_ones() % 2 == 0 { *a } else { -*a })
                .sum::<f64>()
                / count as f64
        })
        .collect();
    let mut gates = Vec::new();
    let rotation = |b: f64| match axis {
        Axis::Y => ry(b),
        Axis::Z => rz(b),
    };
    for (i, &b) in beta.iter().enumerate() {
        if let Some(g) = u3_gate(&rotation(b), target, 1e-15) {
            gates.push(g);
        }
        if m == 0 {
            break;
        }
        let bit = if i + 1 == count {
            m - 1
        } else {
            (gray(i) ^ gray(i + 1)).trailing_zeros() as usize
        };
        let c = controls[bit];
        if drop_last_cz {
            if i + 1 == count {
                break;
            }
            gates.push(Gate::u3(std::f64::consts::FRAC_PI_2, 0.0, std::f64::consts::PI, target));
            gates.push(Gate::cx(c, target));
            gates.push(Gate::u3(std::f64::consts::FRAC_PI_2, 0.0, std::f64::consts::PI, target));
        } else {
            gates.push(Gate::cx(c, target));
        }
    }
    Some(gates)
}

/// Angles of the Z multiplexor realising `D ⊕ D†`.
fn z_angles(d: &[C64]) -> Vec<f64> {
    d.iter().map(|z| -2.0 * z.arg()).collect()
}

/// Synthesises a unitary on `qubits` (`qubits[0]` least significant),
/// dispatching on size.
pub(crate) fn synthesize_gates(u: &ComplexMatrix, qubits: &[usize]) -> Result<Vec<Gate>> {
    match qubits.len() {
        1 => Ok(u3_gate(u, qubits[0], 1e-12).into_iter().collect()),
        2 => kak_gates(u, qubits[0], qubits[1]),
        _ => shannon_gates(u, qubits),
    }
}

pub(crate) fn shannon_gates(u: &ComplexMatrix, qubits: &[usize]) -> Result<Vec<Gate>> {
    let k = qubits.len();
    let top = qubits[k - 1];
    let lower = &qubits[..k - 1];
    let Csd { l0, mut l1, r0, r1, theta } = csd(u)?;

    let ry_angles: Vec<f64> = theta.iter().map(|t| 2.0 * t).collect();
    let ry_gates = multiplexed_rotation(Axis::Y, &ry_angles, top, lower, true);
    if ry_gates.is_some() {
        // fold the omitted CZ(lower[m−1], top) into L1
        let bit = k - 2;
        let diag: Vec<C64> = (0..l1.dim())
            .map(|j| if j >> bit & 1 == 1 { -ONE } else { ONE })
            .collect();
        l1 = l1.mul(&ComplexMatrix::from_diagonal(&diag));
    }
    let (v_r, d_r, w_r) = demultiplex(&r0, &r1)?;
    let (v_l, d_l, w_l) = demultiplex(&l0, &l1)?;
    let rz_r = multiplexed_rotation(Axis::Z, &z_angles(&d_r), top, lower, false);
    let rz_l = multiplexed_rotation(Axis::Z, &z_angles(&d_l), top, lower, false);

    let mut gates = Vec::new();
    if k == 3 {
        let mut carry = [ONE; 4];
        let blocks = [w_r, v_r, w_l, v_l];
        let muxes = [rz_r, ry_gates, rz_l];
        for (i, block) in blocks.iter().enumerate() {
            let m = block.mul(&ComplexMatrix::from_diagonal(&carry));
            if i == 3 {
                gates.extend(kak_gates(&m, lower[0], lower[1])?);
            } else {
                let (g, d) = kak_gates_up_to_diagonal(&m, lower[0], lower[1])?;
                gates.extend(g);
                carry = d;
                if let Some(mux) = &muxes[i] {
                    gates.extend(mux.iter().cloned());
                }
            }
        }
    } else {
        gates.extend(synthesize_gates(&w_r, lower)?);
        gates.extend(rz_r.into_iter().flatten());
        gates.extend(synthesize_gates(&v_r, lower)?);
        gates.extend(ry_gates.into_iter().flatten());
        gates.extend(synthesize_gates(&w_l, lower)?);
        gates.extend(rz_l.into_iter().flatten());
        gates.extend(synthesize_gates(&v_l, lower)?);
    }
    Ok(gates)
}

/// Elementary circuit for a `2^k × 2^k` unitary, `3 ≤ k ≤ 5`, up to global
/// phase.
pub fn shannon_decompose(u: &ComplexMatrix) -> Result<Circuit> {
    let dim = u.dim();
    if !dim.is_power_of_two() || dim < 8 {
        return Err(Error::DimensionMismatch(format!(
            "expected 2^k x 2^k with k >= 3, got {dim}x{dim}"
        )));
    }
    let k = dim.trailing_zeros() as usize;
    if k > MAX_SHANNON_QUBITS {
        return Err(Error::TooManyQubits { got: k, max: MAX_SHANNON_QUBITS });
    }
    let dev = u.unitarity_deviation();
    if dev >= MULTI_QUBIT_TOL {
        return Err(Error::NotUnitary(dev));
    }
    let qubits: Vec<usize> = (0..k).collect();
    Circuit::from_gates(k, shannon_gates(u, &qubits)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_unitary, cx_matrix};
    use crate::linalg::{embed, haar_random_unitary, phase_invariant_distance};
    use crate::rng::RngStream;

    fn dist(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        phase_invariant_distance(a, b).unwrap()
    }

    #[test]
    fn cosine_sine_reconstructs() {
        let mut rng = RngStream::new(61, 0);
        let u = haar_random_unitary(8, &mut rng).unwrap();
        let Csd { l0, l1, r0, r1, theta } = csd(&u).unwrap();
        let h = 4;
        let mut cs = ComplexMatrix::zeros(8);
        for j in 0..h {
            let (s, c) = theta[j].sin_cos();
            cs[(j, j)] = C64::new(c, 0.0);
            cs[(j, j + h)] = C64::new(-s, 0.0);
            cs[(j + h, j)] = C64::new(s, 0.0);
            cs[(j + h, j + h)] = C64::new(c, 0.0);
        }
        let rebuilt = ComplexMatrix::direct_sum(&l0, &l1)
            .mul(&cs)
            .mul(&ComplexMatrix::direct_sum(&r0, &r1));
        assert!(rebuilt.max_abs_diff(&u) < 1e-12);
        for m in [&l0, &l1, &r0, &r1] {
            assert!(m.unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn demultiplexing_reconstructs() {
        let mut rng = RngStream::new(62, 0);
        let a0 = haar_random_unitary(4, &mut rng).unwrap();
        let a1 = haar_random_unitary(4, &mut rng).unwrap();
        let (v, d, w) = demultiplex(&a0, &a1).unwrap();
        let dd = ComplexMatrix::from_diagonal(&d);
        assert!(v.mul(&dd).mul(&w).max_abs_diff(&a0) < 1e-12);
        assert!(v.mul(&dd.adjoint()).mul(&w).max_abs_diff(&a1) < 1e-12);
    }

    #[test]
    fn multiplexors_match_block_diagonal_oracle() {
        let angles = [0.3, -1.1, 2.0, 0.4];
        for (axis, drop) in [(Axis::Y, false), (Axis::Z, false), (Axis::Y, true)] {
            let gates = multiplexed_rotation(axis, &angles, 2, &[0, 1], drop).unwrap();
            let got = circuit_unitary(&Circuit::from_gates(3, gates).unwrap()).unwrap();
            let mut want = ComplexMatrix::zeros(8);
            for (j, &a) in angles.iter().enumerate() {
                let r = if axis == Axis::Y { ry(a) } else { rz(a) };
                for t_out in 0..2 {
                    for t_in in 0..2 {
                        want[(j | t_out << 2, j | t_in << 2)] = r[(t_out, t_in)];
                    }
                }
            }
            if drop {
                let cz = ComplexMatrix::from_diagonal(
                    &(0..8).map(|i| if i >> 1 & 1 == 1 && i >> 2 & 1 == 1 { -ONE } else { ONE }).collect::<Vec<_>>(),
                );
                want = cz.mul(&want);
            }
            assert!(dist(&got, &want) < 1e-12);
        }
        assert!(multiplexed_rotation(Axis::Z, &[0.0; 4], 2, &[0, 1], false).is_none());
    }

    #[test]
    fn identity_and_embedded_cx() {
        let c = shannon_decompose(&ComplexMatrix::identity(8)).unwrap();
        assert!(dist(&circuit_unitary(&c).unwrap(), &ComplexMatrix::identity(8)) < 1e-9);
        let u = embed(&cx_matrix(), &[0, 1], 3).unwrap();
        let c = shannon_decompose(&u).unwrap();
        assert!(dist(&circuit_unitary(&c).unwrap(), &u) < 1e-8);
    }

    #[test]
    fn haar_three_qubits_within_twenty_cx() {
        let mut rng = RngStream::new(63, 0);
        for _ in 0..20 {
            let u = haar_random_unitary(8, &mut rng).unwrap();
            let c = shannon_decompose(&u).unwrap();
            assert!(c.is_elementary());
            assert!(c.cx_count() <= 20, "{} CX", c.cx_count());
            assert!(dist(&circuit_unitary(&c).unwrap(), &u) < 1e-7);
        }
    }

    #[test]
    fn haar_four_and_five_qubits() {
        let mut rng = RngStream::new(64, 0);
        for k in [4usize, 5] {
            let u = haar_random_unitary(1 << k, &mut rng).unwrap();
            let c = shannon_decompose(&u).unwrap();
            assert!(dist(&circuit_unitary(&c).unwrap(), &u) < 1e-7);
            if k == 4 {
                assert!(c.cx_count() <= 120, "{} CX", c.cx_count());
            }
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(shannon_decompose(&ComplexMatrix::identity(4)).is_err());
        assert!(matches!(
            shannon_decompose(&ComplexMatrix::identity(64)),
            Err(Error::TooManyQubits { .. })
        ));
        let m = ComplexMatrix::identity(8).scale(C64::new(1.1, 0.0));
        assert!(matches!(shannon_decompose(&m), Err(Error::NotUnitary(_))));
    }
}
