//! Imaginary-time evolution of matrix product states for QUBO and Ising
//! optimization.
//!
//! Non-local couplings are routed through rectangular or triangular SWAP
//! networks built from nearest-neighbour gates, and logical qubits are placed
//! on the chain by spectral (Fiedler) ordering of the coupling graph.
//!
//! The crate is `no_std` with `alloc`; file formats and the command line
//! front end live in the companion `qite` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod mps;
pub mod oracle;
pub mod ordering;
pub mod problem;
pub mod solver;
pub mod swap_network;

pub use error::{Error, Result};

/// True when `perm` is a bijection on `0..perm.len()`.
pub fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = alloc::vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}
