//! Dense complex matrices and the handful of operations the rest of the crate
//! needs: products, adjoints, Kronecker products, qubit embedding, Haar
//! sampling and a phase-insensitive distance.
//!
//! Factorizations (QR, SVD, eigen, Schur) are delegated to `nalgebra` through
//! [`ComplexMatrix::to_nalgebra`] and [`ComplexMatrix::from_nalgebra`].

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::RngStream;

pub type C64 = num_complex::Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Unitarity threshold for matrices flagged as gate unitaries.
pub const UNITARY_TOL: f64 = 1e-10;

/// Largest register for which full 2^n × 2^n matrices are built.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries cannot form a {dim}x{dim} matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        Self { dim: N, data: rows.iter().flatten().copied().collect() }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// Matrix product; panics on dimension mismatch. See [`matmul`] for the
    /// fallible form.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            let out_row = &mut out[r * n..(r + 1) * n];
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`; `other` occupies the low-order bits.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let d = n * m;
        let mut out = Self::zeros(d);
        for r1 in 0..n {
            for c1 in 0..n {
                let a = self.data[r1 * n + c1];
                if a == ZERO {
                    continue;
                }
                for r2 in 0..m {
                    for c2 in 0..m {
                        out.data[(r1 * m + r2) * d + c1 * m + c2] = a * other.data[r2 * m + c2];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn determinant(&self) -> C64 {
        match self.dim {
            1 => self.data[0],
            2 => self.data[0] * self.data[3] - self.data[1] * self.data[2],
            _ => self.to_nalgebra().determinant(),
        }
    }

    /// ‖U†U − I‖_F.
    pub fn unitarity_deviation(&self) -> f64 {
        self.adjoint().mul(self).sub(&Self::identity(self.dim)).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() < tol
    }

    /// Largest entry-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Extracts the `size`×`size` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, size: usize) -> Self {
        let mut out = Self::zeros(size);
        for r in 0..size {
            for c in 0..size {
                out.data[r * size + c] = self.data[(r0 + r) * self.dim + c0 + c];
            }
        }
        out
    }

    /// Block-diagonal matrix `a ⊕ b`.
    pub fn direct_sum(a: &Self, b: &Self) -> Self {
        let n = a.dim + b.dim;
        let mut out = Self::zeros(n);
        for r in 0..a.dim {
            for c in 0..a.dim {
                out.data[r * n + c] = a.data[r * a.dim + c];
            }
        }
        for r in 0..b.dim {
            for c in 0..b.dim {
                out.data[(a.dim + r) * n + a.dim + c] = b.data[r * b.dim + c];
            }
        }
        out
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] = m[(r, c)];
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = self
                .row(r)
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.dim, b.dim)));
    }
    Ok(a.mul(b))
}

/// Checks that `support` lists distinct qubits below `n`.
pub fn validate_support(support: &[usize], n: usize) -> Result<()> {
    for (i, &q) in support.iter().enumerate() {
        if q >= n {
            return Err(Error::InvalidSupport(format!("qubit {q} out of range for {n} qubits")));
        }
        if support[..i].contains(&q) {
            return Err(Error::InvalidSupport(format!("qubit {q} listed twice")));
        }
    }
    Ok(())
}

/// Embeds `op` into the `n`-qubit space. `support[0]` is the least
/// significant qubit of `op`.
pub fn embed(op: &ComplexMatrix, support: &[usize], n: usize) -> Result<ComplexMatrix> {
    validate_support(support, n)?;
    if op.dim != 1 << support.len() {
        return Err(Error::DimensionMismatch(format!(
            "operator of dimension {} cannot act on {} qubits",
            op.dim,
            support.len()
        )));
    }
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits { got: n, max: MAX_DENSE_QUBITS });
    }
    let full = 1usize << n;
    let k = op.dim;
    let mask: usize = support.iter().map(|&q| 1 << q).sum();
    let scatter = |sub: usize| -> usize {
        support
            .iter()
            .enumerate()
            .filter(|(bit, _)| sub >> bit & 1 == 1)
            .map(|(_, &q)| 1 << q)
            .sum()
    };
    let offsets: Vec<usize> = (0..k).map(scatter).collect();
    let mut out = ComplexMatrix::zeros(full);
    for col in 0..full {
        let rest = col & !mask;
        let sub_c = offsets.iter().position(|&o| o == col & mask).unwrap();
        for (sub_r, &off) in offsets.iter().enumerate() {
            out.data[(rest | off) * full + col] = op.data[sub_r * k + sub_c];
        }
    }
    Ok(out)
}

/// Samples a Haar-random unitary: a complex Ginibre matrix is QR-factored and
/// the columns of Q are rephased by the phases of R's diagonal.
pub fn haar_random_unitary(dim: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut entries = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        entries.push(C64::new(re * scale, im * scale));
    }
    let g = DMatrix::from_row_slice(dim, dim, &entries);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for row in 0..dim {
            q[(row, c)] *= phase;
        }
    }
    ComplexMatrix::from_nalgebra(&q)
}

/// Global phase `e^{iφ}` maximising `Re Tr(a† e^{iφ} b)`.
pub fn best_phase(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let t: C64 = a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum();
    if t.norm() < 1e-300 {
        ONE
    } else {
        t.conj() / t.norm()
    }
}

/// min_φ ‖a − e^{iφ} b‖_F. The optimal phase comes from `Tr(a†b)`; the norm is
/// then evaluated directly, which stays accurate for nearly equal arguments.
pub fn phase_invariant_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.dim, b.dim)));
    }
    let phase = best_phase(a, b);
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

pub mod paulis {
    use super::{ComplexMatrix, C64, I, ONE, ZERO};

    pub fn id() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows([[ZERO, -I], [I, ZERO]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_rows([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]])
    }

    /// Single-qubit Pauli by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
    pub fn by_index(i: usize) -> ComplexMatrix {
        match i & 3 {
            0 => id(),
            1 => x(),
            2 => y(),
            _ => z(),
        }
    }
}
