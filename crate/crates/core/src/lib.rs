//! Ising and QUBO encodings of Hamiltonian-cycle and traveling-salesman
//! instances, with exhaustive classical oracles, a dense state-vector
//! simulator, 3-qubit mutually unbiased bases and a VQE driver.
//!
//! Bit `i` of every bitstring and basis-state index is variable `i` of the
//! encoder's layout, and spin `s = +1` corresponds to bit 0.

pub mod bits;
pub mod dqes;
pub mod encoder;
pub mod error;
pub mod graph;
pub mod ising;
pub mod oracle;
pub mod quantum;
pub mod rational;
pub mod vqe;

pub use bits::Bitstring;
pub use error::{Error, Result};
pub use graph::{load_instance, save_instance, Format, ProblemInstance, Variant};
pub use rational::Rational;
