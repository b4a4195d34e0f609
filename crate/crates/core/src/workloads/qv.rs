//! Quantum-volume model circuits and the heavy-output probability.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::haar_random_unitary;
use crate::optimizer::{optimize, OptimizerConfig};
use crate::rng::RngStream;
use crate::simulator::{bitstring, ideal_probabilities, ShotRecord};
use crate::synthesis::lower_circuit;

/// Relative margin, on the scale `max(median, 2^-n)`, within which a
/// probability counts as equal to the median.
pub const HEAVY_TIE_TOL: f64 = 1e-9;

/// `n` layers, each a random perfect matching of the qubits (one qubit idle
/// when `n` is odd) carrying opaque Haar-random two-qubit gates.
pub fn qv_model_circuit(n: usize, rng: &mut RngStream) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("quantum volume needs at least 2 qubits, got {n}")));
    }
    let mut c = Circuit::new(n);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..n {
        perm.shuffle(rng);
        for pair in perm.chunks_exact(2) {
            c.gates.push(Gate::opaque(pair, haar_random_unitary(4, rng)?)?);
        }
    }
    c.measured = true;
    Ok(c)
}

/// Model circuit lowered to U3/CX and optimized.
pub fn qv_circuit(n: usize, rng: &mut RngStream) -> Result<Circuit> {
    optimize(&lower_circuit(&qv_model_circuit(n, rng)?)?, &OptimizerConfig::default())
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeavySet {
    pub n_qubits: usize,
    pub median: f64,
    /// Outcomes whose ideal probability exceeds the median.
    pub outcomes: BTreeSet<String>,
    indices: Vec<usize>,
}

impl HeavySet {
    /// Heavy set of an ideal probability vector over `n` qubits.
    pub fn from_probabilities(probs: &[f64], n: usize) -> Result<Self> {
        if probs.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!("{} probabilities for {n} qubits", probs.len())));
        }
        let mut sorted = probs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let m = sorted.len();
        let median = if m % 2 == 0 { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) } else { sorted[m / 2] };
        let threshold = median + HEAVY_TIE_TOL * median.max(1.0 / m as f64);
        let indices: Vec<usize> = (0..m).filter(|&i| probs[i] > threshold).collect();
        let outcomes = indices.iter().map(|&i| bitstring(i, n)).collect();
        Ok(Self { n_qubits: n, median, outcomes, indices })
    }

    /// Total probability `probs` assigns to the heavy outcomes.
    pub fn probability(&self, probs: &[f64]) -> f64 {
        self.indices.iter().map(|&i| probs[i]).sum()
    }

    pub fn contains(&self, outcome: &str) -> bool {
        self.outcomes.contains(outcome)
    }
}

/// Heavy set from the circuit's noiseless output distribution.
pub fn heavy_set(c: &Circuit) -> Result<HeavySet> {
    HeavySet::from_probabilities(&ideal_probabilities(c)?, c.n_qubits)
}

/// Fraction of shots landing in the heavy set.
pub fn hop(record: &ShotRecord, heavy: &HeavySet) -> Result<f64> {
    if let Some(k) = record.counts.keys().find(|k| k.len() != heavy.n_qubits) {
        return Err(Error::DimensionMismatch(format!("outcome {k} vs {} qubits", heavy.n_qubits)));
    }
    if record.shots == 0 {
        return Err(Error::InvalidArgument("empty shot record".into()));
    }
    let hits: u64 = record.counts.iter().filter(|(k, _)| heavy.contains(k)).map(|(_, &v)| v).sum();
    Ok(hits as f64 / record.shots as f64)
}
