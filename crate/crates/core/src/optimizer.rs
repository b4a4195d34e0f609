//! Deterministic peephole optimizer over the U3/CX basis.
//!
//! One round is a single forward sweep followed by two-qubit block
//! resynthesis. The sweep keeps, for every qubit, a stack of the surviving
//! gates that touch it. A new U3 is multiplied into the U3 on top of its
//! qubit's stack, a product within tolerance of the identity is deleted, and
//! a CX that meets an identical CX on top of both of its qubits' stacks
//! cancels with it. Deletions pop the stacks, so cancellations cascade. Rounds
//! repeat until the gate list stops changing.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{embed, ComplexMatrix};
use crate::synthesis::kak::kak_gates;
use crate::synthesis::one_qubit::{euler_unchecked, is_identity_up_to_phase};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Upper bound on optimization rounds.
    pub max_passes: usize,
    /// Resynthesize maximal two-qubit blocks with KAK.
    pub block_resynthesis: bool,
    /// Phase-invariant distance below which a U3 counts as the identity.
    pub identity_tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { max_passes: 100, block_resynthesis: true, identity_tolerance: 1e-9 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_passes == 0 {
            return Err(Error::InvalidArgument("max_passes must be at least 1".into()));
        }
        if !(self.identity_tolerance > 0.0 && self.identity_tolerance <= 1e-6) {
            return Err(Error::InvalidArgument(format!(
                "identity_tolerance {} outside (0, 1e-6]",
                self.identity_tolerance
            )));
        }
        Ok(())
    }
}

/// Optimizes an elementary circuit. The result implements the same unitary
/// up to global phase and never has more gates than the input.
pub fn optimize(c: &Circuit, cfg: &OptimizerConfig) -> Result<Circuit> {
    cfg.validate()?;
    if !c.is_elementary() {
        return Err(Error::NotElementary);
    }
    let mut gates = c.gates.clone();
    for _ in 0..cfg.max_passes {
        let mut next = sweep(&gates, c.n_qubits, cfg.identity_tolerance);
        if cfg.block_resynthesis {
            next = resynthesize_blocks(&next, c.n_qubits)?;
        }
        if next == gates {
            break;
        }
        gates = next;
    }
    Ok(Circuit { n_qubits: c.n_qubits, gates, measured: c.measured })
}

fn u3_of(m: &ComplexMatrix, q: usize) -> Gate {
    let (t, p, l, _) = euler_unchecked(m);
    Gate::u3(t, p, l, q)
}

/// Merges U3 runs, drops identities and cancels CX pairs.
fn sweep(gates: &[Gate], n: usize, tol: f64) -> Vec<Gate> {
    let mut out: Vec<Option<Gate>> = Vec::with_capacity(gates.len());
    let mut stacks: Vec<Vec<usize>> = vec![Vec::new(); n];
    for g in gates {
        match *g {
            Gate::U3 { qubit: q, .. } => {
                let prev = stacks[q].last().copied().filter(|&j| matches!(out[j], Some(Gate::U3 { .. })));
                let m = match prev {
                    Some(j) => g.matrix().mul(&out[j].as_ref().unwrap().matrix()),
                    None => g.matrix(),
                };
                if is_identity_up_to_phase(&m, tol) {
                    if let Some(j) = prev {
                        out[j] = None;
                        stacks[q].pop();
                    }
                } else if let Some(j) = prev {
                    out[j] = Some(u3_of(&m, q));
                } else {
                    stacks[q].push(out.len());
                    out.push(Some(g.clone()));
                }
            }
            Gate::Cx { control, target } => {
                let top_c = stacks[control].last().copied();
                let cancels = match top_c {
                    Some(j) => stacks[target].last() == Some(&j) && out[j].as_ref() == Some(g),
                    None => false,
                };
                if cancels {
                    out[top_c.unwrap()] = None;
                    stacks[control].pop();
                    stacks[target].pop();
                } else {
                    stacks[control].push(out.len());
                    stacks[target].push(out.len());
                    out.push(Some(g.clone()));
                }
            }
            Gate::Opaque { .. } => unreachable!("checked elementary"),
        }
    }
    out.into_iter().flatten().collect()
}

struct Block {
    qubits: Vec<usize>,
    members: Vec<usize>,
    cx: usize,
}

/// Greedy maximal two-qubit blocks. Single-qubit runs waiting on a wire are
/// absorbed by the next CX on that wire; any gate that couples a block's
/// qubit to an outside qubit closes the block.
fn collect_blocks(gates: &[Gate], n: usize) -> Vec<Block> {
    let mut blocks: Vec<Block> = Vec::new();
    let mut open: Vec<Option<usize>> = vec![None; n];
    for (i, g) in gates.iter().enumerate() {
        match *g {
            Gate::U3 { qubit, .. } => match open[qubit] {
                Some(b) => blocks[b].members.push(i),
                None => {
                    open[qubit] = Some(blocks.len());
                    blocks.push(Block { qubits: vec![qubit], members: vec![i], cx: 0 });
                }
            },
            Gate::Cx { control, target } => {
                let (bc, bt) = (open[control], open[target]);
                if let (Some(x), Some(y)) = (bc, bt) {
                    if x == y {
                        blocks[x].members.push(i);
                        blocks[x].cx += 1;
                        continue;
                    }
                }
                let id = blocks.len();
                let mut members = Vec::new();
                for b in [bc, bt].into_iter().flatten() {
                    if blocks[b].qubits.len() == 1 {
                        members.append(&mut blocks[b].members);
                    } else {
                        for &q in &blocks[b].qubits {
                            open[q] = None;
                        }
                    }
                }
                members.sort_unstable();
                members.push(i);
                blocks.push(Block { qubits: vec![control, target], members, cx: 1 });
                open[control] = Some(id);
                open[target] = Some(id);
            }
            Gate::Opaque { .. } => unreachable!("checked elementary"),
        }
    }
    blocks
}

fn block_unitary(gates: &[Gate], block: &Block) -> Result<ComplexMatrix> {
    let local = |q: usize| if q == block.qubits[0] { 0 } else { 1 };
    let mut u = ComplexMatrix::identity(4);
    for &i in &block.members {
        let g = &gates[i];
        let support: Vec<usize> = g.qubits().iter().map(|&q| local(q)).collect();
        u = embed(&g.matrix(), &support, 2)?.mul(&u);
    }
    Ok(u)
}

/// Replaces every block with at least two CX by its KAK circuit when that is
/// strictly shorter. The replacement sits at the block's first CX: later
/// block members are only separated from it by gates on other wires, and
/// absorbed single-qubit gates before it commute with everything in between.
fn resynthesize_blocks(gates: &[Gate], n: usize) -> Result<Vec<Gate>> {
    let mut replacement: Vec<Option<Vec<Gate>>> = vec![None; gates.len()];
    let mut removed = vec![false; gates.len()];
    for block in collect_blocks(gates, n) {
        if block.cx < 2 {
            continue;
        }
        let u = block_unitary(gates, &block)?;
        let new = kak_gates(&u, block.qubits[0], block.qubits[1])?;
        if new.len() >= block.members.len() {
            continue;
        }
        let anchor = *block
            .members
            .iter()
            .find(|&&i| matches!(gates[i], Gate::Cx { .. }))
            .expect("block has a CX");
        for &i in &block.members {
            removed[i] = true;
        }
        replacement[anchor] = Some(new);
    }
    let mut out = Vec::with_capacity(gates.len());
    for (i, g) in gates.iter().enumerate() {
        if let Some(r) = replacement[i].take() {
            out.extend(r);
        } else if !removed[i] {
            out.push(g.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_unitary, gate_count};
    use crate::linalg::phase_invariant_distance;
    use crate::rng::RngStream;
    use crate::workloads::random_circuit;
    use proptest::prelude::*;

    fn dist(a: &Circuit, b: &Circuit) -> f64 {
        phase_invariant_distance(&circuit_unitary(a).unwrap(), &circuit_unitary(b).unwrap()).unwrap()
    }

    fn opt(c: &Circuit) -> Circuit {
        optimize(c, &OptimizerConfig::default()).unwrap()
    }

    #[test]
    fn cx_pair_cancels() {
        let mut c = Circuit::new(2);
        c.cx(0, 1).unwrap().cx(0, 1).unwrap();
        assert!(opt(&c).is_empty());
    }

    #[test]
    fn reversed_cx_pair_is_kept_by_the_sweep() {
        let mut c = Circuit::new(2);
        c.cx(0, 1).unwrap().cx(1, 0).unwrap();
        let cfg = OptimizerConfig { block_resynthesis: false, ..Default::default() };
        assert_eq!(optimize(&c, &cfg).unwrap().len(), 2);
    }

    #[test]
    fn u3_pair_merges_into_the_product() {
        let mut c = Circuit::new(1);
        c.u3(0.3, 1.1, -0.4, 0).unwrap().u3(2.0, -0.7, 0.9, 0).unwrap();
        let out = opt(&c);
        assert_eq!(out.len(), 1);
        let want = Gate::u3(2.0, -0.7, 0.9, 0).matrix().mul(&Gate::u3(0.3, 1.1, -0.4, 0).matrix());
        assert!(phase_invariant_distance(&out.gates[0].matrix(), &want).unwrap() < 1e-12);
    }

    #[test]
    fn identity_u3_is_deleted() {
        let mut c = Circuit::new(1);
        c.u3(0.0, 0.0, 0.0, 0).unwrap();
        assert!(opt(&c).is_empty());
        let mut c = Circuit::new(1);
        c.u3(0.0, 0.4, -0.4, 0).unwrap();
        assert!(opt(&c).is_empty());
    }

    #[test]
    fn cancellation_cascades_through_inverse_pairs() {
        let mut c = Circuit::new(3);
        c.cx(0, 1).unwrap().u3(0.4, 0.2, 0.1, 1).unwrap().cx(1, 2).unwrap();
        let folded = c.compose(&c.inverse()).unwrap();
        assert!(opt(&folded).is_empty());
    }

    #[test]
    fn blocking_gate_prevents_cancellation() {
        let mut c = Circuit::new(3);
        c.cx(0, 1).unwrap().cx(1, 2).unwrap().cx(0, 1).unwrap();
        let cfg = OptimizerConfig { block_resynthesis: false, ..Default::default() };
        assert_eq!(optimize(&c, &cfg).unwrap().len(), 3);
    }

    #[test]
    fn block_resynthesis_shortens_long_two_qubit_runs() {
        let c = random_circuit(2, 40, &mut RngStream::new(61, 0));
        assert!(c.cx_count() > 3);
        let out = opt(&c);
        assert!(out.cx_count() <= 3);
        assert!(gate_count(&out).unwrap().total <= 10);
        assert!(dist(&c, &out) < 1e-8);
    }

    #[test]
    fn blocks_absorb_waiting_single_qubit_gates() {
        // U3 on q0 waits while q1 takes part in a CX with q2
        let g = vec![Gate::u3(0.1, 0.2, 0.3, 0), Gate::cx(1, 2), Gate::cx(0, 1), Gate::cx(1, 0)];
        let blocks = collect_blocks(&g, 3);
        let members: Vec<&[usize]> = blocks.iter().map(|b| b.members.as_slice()).collect();
        assert!(members.contains(&[0usize, 2, 3].as_slice()));
        assert!(members.contains(&[1usize].as_slice()));
    }

    #[test]
    fn rejects_opaque_gates_and_bad_config() {
        let mut c = Circuit::new(1);
        c.opaque(&[0], ComplexMatrix::identity(2)).unwrap();
        assert_eq!(opt_err(&c, &OptimizerConfig::default()), Error::NotElementary);
        let bad = OptimizerConfig { max_passes: 0, ..Default::default() };
        assert!(matches!(optimize(&Circuit::new(1), &bad), Err(Error::InvalidArgument(_))));
        let bad = OptimizerConfig { identity_tolerance: 1e-3, ..Default::default() };
        assert!(matches!(optimize(&Circuit::new(1), &bad), Err(Error::InvalidArgument(_))));
    }

    fn opt_err(c: &Circuit, cfg: &OptimizerConfig) -> Error {
        optimize(c, cfg).unwrap_err()
    }

    #[test]
    fn measurement_flag_survives() {
        let mut c = Circuit::new(2);
        c.h(0).unwrap();
        c.measured = true;
        assert!(opt(&c).measured);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn preserves_unitary_and_never_grows(seed in any::<u64>(), n in 1usize..=5, len in 0usize..60) {
            let c = random_circuit(n, len, &mut RngStream::new(seed, 0));
            let out = opt(&c);
            prop_assert!(dist(&c, &out) < 1e-7);
            prop_assert!(gate_count(&out).unwrap().total <= gate_count(&c).unwrap().total);
        }

        #[test]
        fn is_idempotent(seed in any::<u64>(), n in 1usize..=5, len in 0usize..60) {
            let c = random_circuit(n, len, &mut RngStream::new(seed, 0));
            let once = opt(&c);
            prop_assert_eq!(opt(&once), once);
        }
    }
}
