//! Qudit state-vector simulation of Z-corrected single-dit teleportation and
//! the one-way repeater chain built from it.
//!
//! - [`arith`]: dimensions, modular arithmetic, roots of unity
//! - [`state`]: pure states, overlaps, tensor products, reduced density matrices
//! - [`gates`]: generalized Z, X, Fourier, CNOT and their application to registers
//! - [`teleport`]: the three-qudit hop, its closed-form oracle, measurement and correction
//! - [`chain`]: repeater chains with local or deferred correction and a Z-type channel

pub mod arith;
pub mod chain;
pub mod error;
pub mod gates;
pub mod state;
pub mod teleport;

pub use arith::{mod_add, phase_exponent_f, root_of_unity, Dim};
pub use chain::{
    deferred_exponent, enumerate_branches, full_register_oracle, full_register_run, run_chain,
    run_chain_forced, trial_seed, Branch, ChainConfig, ChainResult, NoiseSpec, TransmissionHistory,
};
pub use error::{Error, Result};
pub use gates::GateMatrix;
pub use state::{
    basis_state, fidelity, inner_product, make_state, random_state, reduced_density,
    tensor_product, uniform_superposition, BasisIndex, DensityMatrix, PureState,
};
pub use teleport::{
    entanglement_entropy, eq11_oracle, hop_circuit, prepare_hop, teleport_hop, CorrectionMode,
    HopOutcome, HopSource, OutcomeSource,
};
