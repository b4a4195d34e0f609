//! The unoptimization recipe and the noise scale factor.
//!
//! One round picks two CX gates `B1` (earlier) and `B2`, inserts a Haar
//! random two-qubit gate `A` and its inverse between them, moves `A†` in
//! front of `B1` by conjugation, lowers the resulting multi-qubit gates to
//! U3/CX and reoptimizes. The circuit unitary is unchanged, but the
//! optimizer cannot see the inserted identity any more, so the gate count
//! grows.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{gate_count, Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{embed, haar_random_unitary, ComplexMatrix};
use crate::optimizer::{optimize, OptimizerConfig};
use crate::rng::RngStream;
use crate::synthesis::lower_circuit;

/// Retries allowed when the random strategy draws the same qubit twice.
pub const MAX_QUBIT_RETRIES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// First CX pair in program order sharing exactly one qubit.
    Concatenated,
    /// Uniformly random CX pair.
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::Concatenated, Strategy::Random];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Concatenated => "concatenated",
            Strategy::Random => "random",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concatenated" => Ok(Strategy::Concatenated),
            "random" => Ok(Strategy::Random),
            _ => Err(Error::InvalidArgument(format!("unknown strategy {s:?}"))),
        }
    }
}

/// Choices made in one recipe round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub b1: usize,
    pub b2: usize,
    /// Support of `A`; the first qubit is the least significant.
    pub a_qubits: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub stream_id: u64,
    pub strategy: Strategy,
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug)]
pub struct RecipeResult {
    pub circuit: Circuit,
    pub iterations: usize,
    pub lambda: f64,
    pub provenance: Provenance,
}

fn cx_positions(c: &Circuit) -> Vec<usize> {
    c.gates
        .iter()
        .enumerate()
        .filter(|(_, g)| matches!(g, Gate::Cx { .. }))
        .map(|(i, _)| i)
        .collect()
}

fn cx_qubits(g: &Gate) -> [usize; 2] {
    match *g {
        Gate::Cx { control, target } => [control, target],
        _ => unreachable!("CX positions only"),
    }
}

/// Positions `(b1, b2)`, `b1 < b2`, of the two CX gates the recipe acts on.
///
/// Concatenated selection takes the lexicographically first pair of CX
/// gates that share exactly one qubit and draws nothing from `rng`.
pub fn select_pair(c: &Circuit, strategy: Strategy, rng: &mut RngStream) -> Result<(usize, usize)> {
    let cx = cx_positions(c);
    if cx.len() < 2 {
        return Err(Error::FewerThanTwoCx);
    }
    match strategy {
        Strategy::Concatenated => {
            for (k, &i) in cx.iter().enumerate() {
                let qi = cx_qubits(&c.gates[i]);
                for &j in &cx[k + 1..] {
                    let qj = cx_qubits(&c.gates[j]);
                    let shared = qi.iter().filter(|q| qj.contains(q)).count();
                    if shared == 1 {
                        return Ok((i, j));
                    }
                }
            }
            Err(Error::NoSharingPair)
        }
        Strategy::Random => {
            let a = rng.random_range(0..cx.len());
            let mut b = rng.random_range(0..cx.len() - 1);
            if b >= a {
                b += 1;
            }
            Ok((cx[a.min(b)], cx[a.max(b)]))
        }
    }
}

/// Support of `A`: one qubit of `B1` and one of `B2`, distinct.
fn select_a_qubits(b1: [usize; 2], b2: [usize; 2], strategy: Strategy, rng: &mut RngStream) -> Result<[usize; 2]> {
    match strategy {
        Strategy::Concatenated => {
            let x = b1.iter().find(|q| !b2.contains(q));
            let y = b2.iter().find(|q| !b1.contains(q));
            match (x, y) {
                (Some(&x), Some(&y)) => Ok([x, y]),
                _ => Err(Error::NoSharingPair),
            }
        }
        Strategy::Random => {
            for _ in 0..MAX_QUBIT_RETRIES {
                let x = b1[rng.random_range(0..2)];
                let y = b2[rng.random_range(0..2)];
                if x != y {
                    return Ok([x, y]);
                }
            }
            Err(Error::QubitChoiceExhausted(MAX_QUBIT_RETRIES))
        }
    }
}

fn choose(c: &Circuit, strategy: Strategy, rng: &mut RngStream) -> Result<Step> {
    let (b1, b2) = select_pair(c, strategy, rng)?;
    let a_qubits = select_a_qubits(cx_qubits(&c.gates[b1]), cx_qubits(&c.gates[b2]), strategy, rng)?;
    Ok(Step { b1, b2, a_qubits })
}

/// `E(B1)† E(A†) E(B1)` on `support`, so that applying `B1` then `A†`
/// equals applying the result then `B1`.
pub fn conjugated_inverse(b1: &Gate, a: &ComplexMatrix, a_qubits: [usize; 2], support: &[usize]) -> Result<ComplexMatrix> {
    let local = |q: usize| support.iter().position(|&s| s == q).expect("qubit in support");
    let k = support.len();
    let b1_local: Vec<usize> = b1.qubits().iter().map(|&q| local(q)).collect();
    let eb1 = embed(&b1.matrix(), &b1_local, k)?;
    let ea = embed(&a.adjoint(), &[local(a_qubits[0]), local(a_qubits[1])], k)?;
    Ok(eb1.adjoint().mul(&ea).mul(&eb1))
}

/// Insert and swap: the circuit with `Ã†` before `B1` and `A` placed just
/// before the first later gate touching its qubits. All gates between `B1`
/// and that point act on other wires, so `A†` (implicitly right after `B1`)
/// and `A` meet as an identity.
fn insert_and_swap(c: &Circuit, step: &Step, a: &ComplexMatrix) -> Result<Circuit> {
    let b1 = &c.gates[step.b1];
    let [qa, qb] = step.a_qubits;
    let mut support: Vec<usize> = b1.qubits().to_vec();
    support.extend([qa, qb]);
    support.sort_unstable();
    support.dedup();
    let tilde = conjugated_inverse(b1, a, step.a_qubits, &support)?;
    let a_at = (step.b1 + 1..c.gates.len())
        .find(|&k| c.gates[k].acts_on(qa) || c.gates[k].acts_on(qb))
        .unwrap_or(c.gates.len());
    debug_assert!(a_at <= step.b2);
    let mut gates = Vec::with_capacity(c.gates.len() + 2);
    gates.extend_from_slice(&c.gates[..step.b1]);
    gates.push(Gate::opaque(&support, tilde)?);
    gates.push(b1.clone());
    gates.extend_from_slice(&c.gates[step.b1 + 1..a_at]);
    gates.push(Gate::opaque(&step.a_qubits, a.clone())?);
    gates.extend_from_slice(&c.gates[a_at..]);
    Ok(Circuit { n_qubits: c.n_qubits, gates, measured: c.measured })
}

fn apply_step(c: &Circuit, step: &Step, a: &ComplexMatrix, cfg: &OptimizerConfig) -> Result<Circuit> {
    let swapped = insert_and_swap(c, step, a)?;
    optimize(&lower_circuit(&swapped)?, cfg)
}

fn step_with_record(c: &Circuit, strategy: Strategy, rng: &mut RngStream, cfg: &OptimizerConfig) -> Result<(Circuit, Step)> {
    if !c.is_elementary() {
        return Err(Error::NotElementary);
    }
    let step = choose(c, strategy, rng)?;
    let a = haar_random_unitary(4, rng)?;
    Ok((apply_step(c, &step, &a, cfg)?, step))
}

/// One round of the recipe: insert, swap, decompose, synthesize.
pub fn unoptimize_step(c: &Circuit, strategy: Strategy, rng: &mut RngStream, cfg: &OptimizerConfig) -> Result<Circuit> {
    Ok(step_with_record(c, strategy, rng, cfg)?.0)
}

/// `R_0(C), …, R_i(C)` of one recursive chain. `R_0` is the optimized input
/// and every λ is relative to it. Round `k` draws from the substream
/// `("unoptimize-step", k)` of `rng`.
pub fn unoptimize_chain(
    c: &Circuit,
    i: usize,
    strategy: Strategy,
    rng: &RngStream,
    cfg: &OptimizerConfig,
) -> Result<Vec<RecipeResult>> {
    let base = optimize(c, cfg)?;
    let mut provenance = Provenance { seed: rng.seed(), stream_id: rng.stream_id(), strategy, steps: Vec::new() };
    let mut out = vec![RecipeResult {
        lambda: noise_scale_factor(&base, &base)?,
        circuit: base.clone(),
        iterations: 0,
        provenance: provenance.clone(),
    }];
    let mut current = base.clone();
    for k in 0..i {
        let mut sub = rng.substream("unoptimize-step", k as u64);
        let (next, step) = step_with_record(&current, strategy, &mut sub, cfg)?;
        provenance.steps.push(step);
        current = next;
        out.push(RecipeResult {
            lambda: noise_scale_factor(&base, &current)?,
            circuit: current.clone(),
            iterations: k + 1,
            provenance: provenance.clone(),
        });
    }
    Ok(out)
}

/// `R_i(C)`, the recipe applied `i` times.
pub fn unoptimize(c: &Circuit, i: usize, strategy: Strategy, rng: &RngStream, cfg: &OptimizerConfig) -> Result<RecipeResult> {
    Ok(unoptimize_chain(c, i, strategy, rng, cfg)?.pop().expect("chain holds R_0"))
}

/// Rebuilds `R_i(C)` from a provenance record, checking every recorded
/// choice against the regenerated one.
pub fn replay(c: &Circuit, provenance: &Provenance, cfg: &OptimizerConfig) -> Result<RecipeResult> {
    let rng = RngStream::new(provenance.seed, provenance.stream_id);
    let base = optimize(c, cfg)?;
    let mut current = base.clone();
    for (k, recorded) in provenance.steps.iter().enumerate() {
        let mut sub = rng.substream("unoptimize-step", k as u64);
        let step = choose(&current, provenance.strategy, &mut sub)?;
        if &step != recorded {
            return Err(Error::InvalidArgument(format!("provenance step {k} does not match: {recorded:?} vs {step:?}")));
        }
        let a = haar_random_unitary(4, &mut sub)?;
        current = apply_step(&current, &step, &a, cfg)?;
    }
    Ok(RecipeResult {
        lambda: noise_scale_factor(&base, &current)?,
        circuit: current,
        iterations: provenance.steps.len(),
        provenance: provenance.clone(),
    })
}

/// λ = n(unopt) / n(original) with `n` the total U3 + CX count, so that
/// λ ≥ 1 grows with the amount of inserted noise.
pub fn noise_scale_factor(original: &Circuit, unopt: &Circuit) -> Result<f64> {
    let n0 = gate_count(original)?.total;
    let n1 = gate_count(unopt)?.total;
    if n0 == 0 {
        return Err(Error::InvalidArgument("original circuit has no gates".into()));
    }
    Ok(n1 as f64 / n0 as f64)
}
