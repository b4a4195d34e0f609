//! Noisy execution of elementary circuits.
//!
//! Noise model: after every gate acting on `k` qubits, the depolarizing
//! channel `E(ρ) = (1 − p) ρ + p · Tr_S(ρ) ⊗ I/2^k` is applied on the gate's
//! qubits `S`, with `p = p1` for U3 and `p = p2` for CX. Because the
//! identity term of the Pauli twirl is absorbed into the first term, a
//! trajectory applies a uniformly random non-identity Pauli with probability
//! `p (4^k − 1) / 4^k`.
//!
//! Three interchangeable backends sample shots from that channel:
//!
//! * [`run_trajectories`]: one statevector trajectory per shot.
//! * [`SimMethod::Batched`]: one trajectory per group of shots, for large
//!   registers where trajectories dominate the cost.
//! * [`SimMethod::Density`]: the exact output distribution from a density
//!   matrix, followed by multinomial sampling.
//!
//! Measurement outcomes are printed as bitstrings whose character `i` is
//! qubit `i`, so qubit 0 is leftmost.

pub mod density;
pub mod statevector;
pub mod trajectory;

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub use density::{density_probabilities, exact_density};
pub use trajectory::run_trajectories;

/// Largest register handled by statevector simulation.
pub const MAX_STATEVECTOR_QUBITS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for p in [p1, p2] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("noise probability {p} outside [0, 1]")));
            }
        }
        Ok(Self { p1, p2 })
    }

    pub fn uniform(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn noiseless() -> Self {
        Self { p1: 0.0, p2: 0.0 }
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0
    }

    /// Depolarizing probability for a gate on `k` qubits.
    pub fn rate(&self, k: usize) -> f64 {
        if k == 1 {
            self.p1
        } else {
            self.p2
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { p1: 0.001, p2: 0.001 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl ShotRecord {
    /// Builds a record from `(basis index, count)` pairs.
    pub fn from_indices<I: IntoIterator<Item = (usize, u64)>>(n: usize, counts: I) -> Self {
        let mut map = BTreeMap::new();
        let mut shots = 0;
        for (idx, k) in counts {
            if k == 0 {
                continue;
            }
            *map.entry(bitstring(idx, n)).or_insert(0) += k;
            shots += k;
        }
        Self { shots, counts: map }
    }

    /// Bit length of the outcomes, if any were recorded.
    pub fn n_bits(&self) -> Option<usize> {
        self.counts.keys().next().map(String::len)
    }

    /// Counts keyed by basis index.
    pub fn index_counts(&self) -> Result<Vec<(usize, u64)>> {
        self.counts.iter().map(|(s, &k)| Ok((parse_bitstring(s)?, k))).collect()
    }
}

/// Bitstring of basis index `idx`; character `i` is qubit `i`.
pub fn bitstring(idx: usize, n: usize) -> String {
    (0..n).map(|q| if idx >> q & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bitstring(s: &str) -> Result<usize> {
    s.chars().enumerate().try_fold(0usize, |acc, (q, ch)| match ch {
        '0' => Ok(acc),
        '1' => Ok(acc | 1 << q),
        _ => Err(Error::InvalidArgument(format!("'{s}' is not a bitstring"))),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMethod {
    /// One trajectory per shot.
    Trajectories,
    /// One trajectory per `shots_per_trajectory` shots.
    Batched { shots_per_trajectory: u64 },
    /// Exact density-matrix distribution, multinomially sampled.
    Density,
    /// Density for small registers, batched trajectories otherwise.
    Auto,
}

/// Registers up to this size use the density backend under [`SimMethod::Auto`].
pub const AUTO_DENSITY_MAX_QUBITS: usize = 8;

/// Number of trajectories [`SimMethod::Auto`] aims for on large registers.
pub const AUTO_TRAJECTORIES: u64 = 2000;

pub fn sample(
    c: &Circuit,
    noise: &NoiseModel,
    shots: u64,
    rng: &RngStream,
    method: SimMethod,
) -> Result<ShotRecord> {
    match method {
        SimMethod::Trajectories => trajectory::run_batched(c, noise, shots, 1, rng),
        SimMethod::Batched { shots_per_trajectory } => {
            trajectory::run_batched(c, noise, shots, shots_per_trajectory, rng)
        }
        SimMethod::Density => {
            if shots == 0 {
                return Err(Error::InvalidArgument("shots must be positive".into()));
            }
            let probs = density_probabilities(c, noise)?;
            Ok(sample_distribution(&probs, c.n_qubits, shots, &mut rng.substream("density", 0)))
        }
        SimMethod::Auto => {
            if c.n_qubits <= AUTO_DENSITY_MAX_QUBITS {
                sample(c, noise, shots, rng, SimMethod::Density)
            } else {
                let per = shots.div_ceil(AUTO_TRAJECTORIES).max(1);
                trajectory::run_batched(c, noise, shots, per, rng)
            }
        }
    }
}

/// Draws `shots` outcomes from `probs` by sequential binomial splitting.
pub fn sample_distribution(probs: &[f64], n: usize, shots: u64, rng: &mut RngStream) -> ShotRecord {
    let mut remaining_shots = shots;
    let mut remaining_mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let mut counts = Vec::new();
    for (idx, &p) in probs.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        let p = p.max(0.0);
        let k = if remaining_mass <= p || idx == probs.len() - 1 {
            remaining_shots
        } else if p == 0.0 {
            0
        } else {
            let frac = (p / remaining_mass).clamp(0.0, 1.0);
            Binomial::new(remaining_shots, frac).map(|b| b.sample(rng)).unwrap_or(0)
        };
        remaining_shots -= k;
        remaining_mass -= p;
        counts.push((idx, k));
    }
    ShotRecord::from_indices(n, counts)
}

/// Noiseless outcome probabilities `|ψ_i|²`.
pub fn ideal_probabilities(c: &Circuit) -> Result<Vec<f64>> {
    if c.n_qubits > MAX_STATEVECTOR_QUBITS {
        return Err(Error::TooManyQubits { got: c.n_qubits, max: MAX_STATEVECTOR_QUBITS });
    }
    Ok(statevector::final_state(c).iter().map(|a| a.norm_sqr()).collect())
}

/// Index of the first cumulative weight exceeding `u`.
pub(crate) fn search_cdf(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&x| x <= u).min(cdf.len() - 1)
}

pub(crate) fn cumulative(probs: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

pub(crate) fn draw(cdf: &[f64], rng: &mut impl Rng) -> usize {
    let total = *cdf.last().unwrap();
    search_cdf(cdf, rng.random::<f64>() * total)
}
