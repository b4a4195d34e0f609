//! Gate-level circuit IR over the U3/CX basis, with opaque k-qubit unitaries
//! as an intermediate form during unoptimization.

pub mod qasm;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};
use crate::linalg::{validate_support, ComplexMatrix, C64, MAX_DENSE_QUBITS, ONE, UNITARY_TOL, ZERO};
use crate::simulator::statevector;

pub use qasm::{from_qasm, to_qasm};

pub type Qubits = SmallVec<[usize; 3]>;

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    U3 { theta: f64, phi: f64, lambda: f64, qubit: usize },
    Cx { control: usize, target: usize },
    /// Arbitrary unitary; `qubits[0]` is the least significant qubit of
    /// `matrix`.
    Opaque { qubits: Qubits, matrix: ComplexMatrix },
}

impl Gate {
    pub fn u3(theta: f64, phi: f64, lambda: f64, qubit: usize) -> Self {
        Gate::U3 { theta, phi, lambda, qubit }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Gate::Cx { control, target }
    }

    /// Opaque gate; the matrix must be unitary and match the qubit count.
    pub fn opaque(qubits: &[usize], matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 1 << qubits.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}-dimensional matrix on {} qubits",
                matrix.dim(),
                qubits.len()
            )));
        }
        let dev = matrix.unitarity_deviation();
        if dev >= UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Gate::Opaque { qubits: qubits.iter().copied().collect(), matrix })
    }

    pub fn qubits(&self) -> Qubits {
        match self {
            Gate::U3 { qubit, .. } => smallvec![*qubit],
            Gate::Cx { control, target } => smallvec![*control, *target],
            Gate::Opaque { qubits, .. } => qubits.clone(),
        }
    }

    pub fn acts_on(&self, q: usize) -> bool {
        match self {
            Gate::U3 { qubit, .. } => *qubit == q,
            Gate::Cx { control, target } => *control == q || *target == q,
            Gate::Opaque { qubits, .. } => qubits.contains(&q),
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            Gate::U3 { .. } => 1,
            Gate::Cx { .. } => 2,
            Gate::Opaque { qubits, .. } => qubits.len(),
        }
    }

    pub fn is_elementary(&self) -> bool {
        !matches!(self, Gate::Opaque { .. })
    }

    /// Matrix of the gate on its own qubits in [`Gate::qubits`] order.
    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            Gate::U3 { theta, phi, lambda, .. } => u3_matrix(*theta, *phi, *lambda),
            Gate::Cx { .. } => cx_matrix(),
            Gate::Opaque { matrix, .. } => matrix.clone(),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            Gate::U3 { theta, phi, lambda, qubit } => Gate::u3(-theta, -lambda, -phi, *qubit),
            Gate::Cx { .. } => self.clone(),
            Gate::Opaque { qubits, matrix } => {
                Gate::Opaque { qubits: qubits.clone(), matrix: matrix.adjoint() }
            }
        }
    }
}

/// U3(θ,φ,λ) = [[cos θ/2, −e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(φ+λ)} cos θ/2]].
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_rows([
        [C64::new(c, 0.0), -C64::from_polar(s, lambda)],
        [C64::from_polar(s, phi), C64::from_polar(c, phi + lambda)],
    ])
}

/// CX with the control as the least significant qubit.
pub fn cx_matrix() -> ComplexMatrix {
    ComplexMatrix::from_rows([
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, ZERO, ZERO, ONE],
        [ZERO, ZERO, ONE, ZERO],
        [ZERO, ONE, ZERO, ZERO],
    ])
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    /// Terminal measurement of every qubit.
    pub measured: bool,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1, "a circuit needs at least one qubit");
        Self { n_qubits, gates: Vec::new(), measured: false }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        validate_support(&gate.qubits(), self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn u3(&mut self, theta: f64, phi: f64, lambda: f64, q: usize) -> Result<&mut Self> {
        self.push(Gate::u3(theta, phi, lambda, q))
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<&mut Self> {
        self.push(Gate::cx(control, target))
    }

    pub fn h(&mut self, q: usize) -> Result<&mut Self> {
        self.u3(PI / 2.0, 0.0, PI, q)
    }

    pub fn x(&mut self, q: usize) -> Result<&mut Self> {
        self.u3(PI, 0.0, PI, q)
    }

    pub fn z(&mut self, q: usize) -> Result<&mut Self> {
        self.u3(0.0, 0.0, PI, q)
    }

    pub fn u2(&mut self, phi: f64, lambda: f64, q: usize) -> Result<&mut Self> {
        self.u3(PI / 2.0, phi, lambda, q)
    }

    /// CZ lowered as H(b) CX(a,b) H(b).
    pub fn cz(&mut self, a: usize, b: usize) -> Result<&mut Self> {
        self.h(b)?.cx(a, b)?.h(b)
    }

    pub fn opaque(&mut self, qubits: &[usize], matrix: ComplexMatrix) -> Result<&mut Self> {
        self.push(Gate::opaque(qubits, matrix)?)
    }

    pub fn is_elementary(&self) -> bool {
        self.gates.iter().all(Gate::is_elementary)
    }

    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cx { .. })).count()
    }

    /// `self` followed by `other`.
    pub fn compose(&self, other: &Circuit) -> Result<Circuit> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        let mut out = self.clone();
        out.gates.extend(other.gates.iter().cloned());
        out.measured = self.measured || other.measured;
        Ok(out)
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            measured: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCount {
    pub singles: usize,
    pub doubles: usize,
    pub total: usize,
}

impl std::ops::Add for GateCount {
    type Output = GateCount;

    fn add(self, o: GateCount) -> GateCount {
        GateCount {
            singles: self.singles + o.singles,
            doubles: self.doubles + o.doubles,
            total: self.total + o.total,
        }
    }
}

/// Counts U3 and CX gates. Measurement is not a gate.
pub fn gate_count(c: &Circuit) -> Result<GateCount> {
    let mut n = GateCount::default();
    for g in &c.gates {
        match g {
            Gate::U3 { .. } => n.singles += 1,
            Gate::Cx { .. } => n.doubles += 1,
            Gate::Opaque { .. } => return Err(Error::NotElementary),
        }
    }
    n.total = n.singles + n.doubles;
    Ok(n)
}

/// Full unitary of the circuit, first gate applied first.
///
/// The row-major matrix is treated as a state on `2n` qubits whose high `n`
/// bits index rows, so left-multiplying by a gate is one state update.
pub fn circuit_unitary(c: &Circuit) -> Result<ComplexMatrix> {
    let n = c.n_qubits;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits { got: n, max: MAX_DENSE_QUBITS });
    }
    let dim = 1usize << n;
    let mut flat = ComplexMatrix::identity(dim).as_slice().to_vec();
    for g in &c.gates {
        statevector::apply_gate_shifted(&mut flat, g, n);
    }
    ComplexMatrix::from_vec(dim, flat)
}
