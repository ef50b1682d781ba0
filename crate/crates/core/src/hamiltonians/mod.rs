//! Spin-chain and random-matrix Hamiltonians with their bipartite splits.

pub mod chain;
pub mod pauli;
pub mod random;
pub mod system;

pub use chain::{build_spin_chain, decompose_chain, decompose_chain_with, SpinChainParams, DEFAULT_MAX_SITES};
pub use pauli::{pauli_string, site_pauli};
pub use random::{
    build_random_system, build_random_system_with, haar_orthogonal, sample_goe, seeded_rng,
    stream_rng, RandomSystemParams, SeededRng,
};
pub use system::{reassemble, BipartiteSystem, ProductSpectrum};
