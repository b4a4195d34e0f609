//! Decomposition of arbitrary unitaries into the U3/CX basis.
//!
//! Tolerances follow the depth of the construction: 1e-10 for single-qubit
//! Euler angles, 1e-8 for two-qubit KAK circuits and 1e-7 for Shannon
//! decompositions. Global phases are discarded at circuit level.

pub mod kak;
pub mod lower;
pub mod one_qubit;
pub mod shannon;

pub use kak::{canonical_gate, kak, kak_decompose, KakDecomposition};
pub use lower::lower_circuit;
pub use one_qubit::zyz_to_u3;
pub use shannon::shannon_decompose;
