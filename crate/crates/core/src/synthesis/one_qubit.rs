use crate::circuit::{u3_matrix, Gate};
use crate::error::{Error, Result};
use crate::linalg::{best_phase, phase_invariant_distance, ComplexMatrix, C64, ONE, ZERO};

/// Unitarity tolerance for single-qubit inputs.
pub const ONE_QUBIT_TOL: f64 = 1e-10;

/// Euler angles of a 2×2 unitary: `u = e^{i·phase} U3(θ, φ, λ)` with
/// `θ ∈ [0, π]` and `φ, λ ∈ (−π, π]`.
pub fn zyz_to_u3(u: &ComplexMatrix) -> Result<(f64, f64, f64, f64)> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("expected 2x2, got {0}x{0}", u.dim())));
    }
    let dev = u.unitarity_deviation();
    if dev >= ONE_QUBIT_TOL {
        return Err(Error::NotUnitary(dev));
    }
    Ok(euler_unchecked(u))
}

pub(crate) fn euler_unchecked(u: &ComplexMatrix) -> (f64, f64, f64, f64) {
    let su = u.scale(u.determinant().sqrt().inv());
    let theta = 2.0 * su[(1, 0)].norm().atan2(su[(0, 0)].norm());
    let sum_half = su[(1, 1)].arg();
    let diff_half = su[(1, 0)].arg();
    let phi = wrap(sum_half + diff_half);
    let lambda = wrap(sum_half - diff_half);
    let phase = best_phase(u, &u3_matrix(theta, phi, lambda)).arg();
    (theta, phi, lambda, phase)
}

/// Wraps an angle into (−π, π].
pub fn wrap(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// U3 gate for `u` on `qubit`, or `None` when `u` is within `tol` of the
/// identity up to phase.
pub fn u3_gate(u: &ComplexMatrix, qubit: usize, tol: f64) -> Option<Gate> {
    if is_identity_up_to_phase(u, tol) {
        return None;
    }
    let (theta, phi, lambda, _) = euler_unchecked(u);
    Some(Gate::u3(theta, phi, lambda, qubit))
}

pub fn is_identity_up_to_phase(u: &ComplexMatrix, tol: f64) -> bool {
    phase_invariant_distance(u, &ComplexMatrix::identity(u.dim())).unwrap() < tol
}

/// exp(−iθZ/2)
pub fn rz(theta: f64) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[C64::from_polar(1.0, -theta / 2.0), C64::from_polar(1.0, theta / 2.0)])
}

/// exp(−iθY/2)
pub fn ry(theta: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_rows([[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]])
}

/// exp(−iθX/2)
pub fn rx(theta: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_rows([[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]])
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_rows([[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]])
}

pub fn s_gate() -> ComplexMatrix {
    ComplexMatrix::from_rows([[ONE, ZERO], [ZERO, C64::new(0.0, 1.0)]])
}
