//! Benchmark circuit families and their observables.

pub mod qaoa;
pub mod qv;

use std::f64::consts::PI;

use rand::Rng;

use crate::circuit::{Circuit, Gate};
use crate::rng::RngStream;

pub use qaoa::{cut_value, expected_cut, qaoa_circuit, random_3regular, Graph, QaoaParams};
pub use qv::{heavy_set, hop, qv_circuit, qv_model_circuit, HeavySet};

/// Random elementary circuit: each gate is a CX on a random ordered pair
/// (probability 1/2 when `n ≥ 2`) or a U3 with random angles.
pub fn random_circuit(n: usize, len: usize, rng: &mut RngStream) -> Circuit {
    let mut c = Circuit::new(n);
    for _ in 0..len {
        if n >= 2 && rng.random_bool(0.5) {
            let (a, b) = random_pair(n, rng);
            c.gates.push(Gate::cx(a, b));
        } else {
            let q = rng.random_range(0..n);
            c.gates.push(Gate::u3(
                rng.random_range(0.0..PI),
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
                q,
            ));
        }
    }
    c
}

fn random_pair(n: usize, rng: &mut RngStream) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}
