//! Circuit unoptimization as a digital noise-amplification pass for
//! zero-noise extrapolation (ZNE).
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] and [`rng`]: dense complex matrices, Haar sampling and
//!   reproducible random streams.
//! * [`circuit`]: the U3/CX gate-level IR, gate counting, unitary
//!   reconstruction and OpenQASM 2.0 import/export.
//! * [`synthesis`]: single-qubit Euler, two-qubit KAK and multi-qubit
//!   Shannon decompositions into the U3/CX basis.
//! * [`optimizer`]: a deterministic peephole optimizer.
//! * [`unoptimizer`]: the insert/swap/decompose/synthesize recipe and the
//!   noise scale factor.
//! * [`simulator`]: noisy trajectory and density-matrix simulation.
//! * [`workloads`]: quantum-volume and QAOA Max-Cut circuits with their
//!   observables.
//! * [`zne`]: datasets, least-squares extrapolation and ensemble statistics.
//!
//! Qubit ordering is little-endian everywhere: qubit 0 is the least
//! significant bit of a basis-state index.

pub mod circuit;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod rng;
pub mod simulator;
pub mod synthesis;
pub mod unoptimizer;
pub mod workloads;
pub mod zne;

pub use circuit::{circuit_unitary, gate_count, Circuit, Gate, GateCount};
pub use error::{Error, Result};
pub use linalg::{embed, haar_random_unitary, matmul, phase_invariant_distance, ComplexMatrix, C64};
pub use optimizer::{optimize, OptimizerConfig};
pub use unoptimizer::{noise_scale_factor, unoptimize, unoptimize_step, RecipeResult, Strategy};
pub use rng::RngStream;
pub use simulator::{NoiseModel, ShotRecord, SimMethod};

