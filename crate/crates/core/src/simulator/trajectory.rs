//! Monte-Carlo statevector trajectories.
//!
//! Error locations are drawn directly instead of testing every gate: with
//! per-gate error probabilities `q_g` and cumulative hazard
//! `H_g = −Σ_{j≤g} ln(1 − q_j)`, the next error after gate `g` is the first
//! gate whose hazard exceeds `H_g + Exp(1)`. Trajectories without errors
//! reuse the ideal output distribution, and faulty ones restart from the
//! nearest cached ideal state before their first error.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use std::collections::BTreeMap;

use super::statevector::{apply_gate, apply_pauli, zero_state};
use super::{cumulative, draw, NoiseModel, ShotRecord, MAX_STATEVECTOR_QUBITS};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::rng::RngStream;

/// Byte budget for cached ideal states.
const CHECKPOINT_BUDGET: usize = 256 << 20;

/// Trajectories per parallel task.
const CHUNK: u64 = 256;

struct Plan<'a> {
    circuit: &'a Circuit,
    hazard: Vec<f64>,
    interval: usize,
    checkpoints: Vec<Vec<C64>>,
    ideal_cdf: Vec<f64>,
}

impl<'a> Plan<'a> {
    fn new(c: &'a Circuit, noise: &NoiseModel) -> Result<Self> {
        if c.n_qubits > MAX_STATEVECTOR_QUBITS {
            return Err(Error::TooManyQubits { got: c.n_qubits, max: MAX_STATEVECTOR_QUBITS });
        }
        let mut hazard = Vec::with_capacity(c.gates.len());
        let mut acc = 0.0;
        for g in &c.gates {
            if !g.is_elementary() {
                return Err(Error::NotElementary);
            }
            let k = g.num_qubits();
            let terms = (1usize << (2 * k)) as f64;
            let q = noise.rate(k) * (terms - 1.0) / terms;
            acc += -(1.0 - q).ln();
            hazard.push(acc);
        }
        let state_bytes = (16usize << c.n_qubits).max(1);
        let max_states = (CHECKPOINT_BUDGET / state_bytes).max(1);
        let interval = c.gates.len().div_ceil(max_states).max(32);
        let mut checkpoints = Vec::new();
        let mut psi = zero_state(c.n_qubits);
        for (i, g) in c.gates.iter().enumerate() {
            if i % interval == 0 {
                checkpoints.push(psi.clone());
            }
            apply_gate(&mut psi, g);
        }
        if checkpoints.is_empty() {
            checkpoints.push(psi.clone());
        }
        let ideal_cdf = cumulative(psi.iter().map(|a| a.norm_sqr()));
        Ok(Self { circuit: c, hazard, interval, checkpoints, ideal_cdf })
    }

    /// Gate indices after which an error occurs.
    fn error_locations(&self, rng: &mut RngStream) -> Vec<usize> {
        let mut out = Vec::new();
        let mut t = 0.0;
        loop {
            let e: f64 = rng.sample(Exp1);
            t += e;
            let g = self.hazard.partition_point(|&h| h <= t);
            if g >= self.hazard.len() {
                return out;
            }
            out.push(g);
            t = self.hazard[g];
        }
    }

    fn faulty_state(&self, errors: &[usize], rng: &mut RngStream) -> Vec<C64> {
        let first = errors[0];
        let slot = first / self.interval;
        let mut psi = self.checkpoints[slot].clone();
        let mut pending = errors.iter().peekable();
        for (i, g) in self.circuit.gates.iter().enumerate().skip(slot * self.interval) {
            apply_gate(&mut psi, g);
            if pending.peek() == Some(&&i) {
                pending.next();
                let qs = g.qubits();
                let pauli = rng.random_range(1..1usize << (2 * qs.len()));
                for (j, &q) in qs.iter().enumerate() {
                    apply_pauli(&mut psi, q, pauli >> (2 * j) & 3);
                }
            }
        }
        psi
    }

    /// Runs `trajectories` trajectories, drawing `per` shots from each
    /// except the last, which draws `last`.
    fn run_chunk(&self, trajectories: u64, per: u64, last: u64, rng: &mut RngStream) -> BTreeMap<usize, u64> {
        let mut counts = BTreeMap::new();
        for t in 0..trajectories {
            let shots = if t + 1 == trajectories { last } else { per };
            let errors = self.error_locations(rng);
            if errors.is_empty() {
                for _ in 0..shots {
                    *counts.entry(draw(&self.ideal_cdf, rng)).or_insert(0) += 1;
                }
            } else {
                let psi = self.faulty_state(&errors, rng);
                let cdf = cumulative(psi.iter().map(|a| a.norm_sqr()));
                for _ in 0..shots {
                    *counts.entry(draw(&cdf, rng)).or_insert(0) += 1;
                }
            }
        }
        counts
    }
}

/// One trajectory per shot.
pub fn run_trajectories(c: &Circuit, noise: &NoiseModel, shots: u64, rng: &RngStream) -> Result<ShotRecord> {
    run_batched(c, noise, shots, 1, rng)
}

/// One trajectory per `per_trajectory` shots. Work is split into fixed
/// chunks with their own substreams, so the record does not depend on the
/// number of worker threads.
pub fn run_batched(
    c: &Circuit,
    noise: &NoiseModel,
    shots: u64,
    per_trajectory: u64,
    rng: &RngStream,
) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    if per_trajectory == 0 {
        return Err(Error::InvalidArgument("shots per trajectory must be positive".into()));
    }
    let plan = Plan::new(c, noise)?;
    let trajectories = shots.div_ceil(per_trajectory);
    let tail = shots - (trajectories - 1) * per_trajectory;
    let chunks = trajectories.div_ceil(CHUNK);
    let partial: Vec<BTreeMap<usize, u64>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut sub = rng.substream("trajectory-chunk", k);
            let count = CHUNK.min(trajectories - k * CHUNK);
            let last = if k + 1 == chunks { tail } else { per_trajectory };
            plan.run_chunk(count, per_trajectory, last, &mut sub)
        })
        .collect();
    let mut merged: BTreeMap<usize, u64> = BTreeMap::new();
    for part in partial {
        for (idx, k) in part {
            *merged.entry(idx).or_insert(0) += k;
        }
    }
    Ok(ShotRecord::from_indices(c.n_qubits, merged))
}

/// Faulty-gate indices of one trajectory, exposed for statistical tests.
#[doc(hidden)]
pub fn sample_error_locations(c: &Circuit, noise: &NoiseModel, rng: &mut RngStream) -> Result<Vec<usize>> {
    Ok(Plan::new(c, noise)?.error_locations(rng))
}
