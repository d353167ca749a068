//! Universal quantum cloning of symmetric d-level photonic states by
//! stimulated emission.
//!
//! An inverted medium of `N` atoms with one excited level and `d` degenerate
//! ground levels, each transition coupled to its own photonic mode, clones
//! photons sitting in the symmetric (Bose) subspace of those modes. After the
//! collective atomic operators are written as oscillators `b_r` (ground) and
//! `c` (excited), the interaction is
//!
//! ```text
//! H = γ (a_1 b_1 + … + a_d b_d) c† + H.c.
//! ```
//!
//! and every occupation-basis input `|j⟩_a |0⟩_b |N⟩_c` evolves inside an
//! `(N+1)`-dimensional ladder spanned by states `|F_l, j⟩` that carry `l`
//! additional photons.
//!
//! Modules:
//! - [`fock`]: occupation-vector bases and log-factorial combinatorics.
//! - [`ladder`]: the tridiagonal ladder Hamiltonian and emission amplitudes.
//! - [`cloner`]: joint a⊗b output states for basis, pure and mixed inputs.
//! - [`reduction`]: partial traces, fidelities and shrinking factors.
//! - [`oracle`]: brute-force Fock-space verification of the ladder.
//! - [`cli`]: command-line driver.

pub mod cli;
pub mod cloner;
pub mod error;
pub mod fock;
pub mod ladder;
pub mod oracle;
pub mod reduction;
pub mod sampling;
mod tridiag;

pub use cloner::{
    clone_basis_state, clone_mixed, clone_pure, expand_identical, CloneOutput, JointBasis,
    PureQudit, SymmetricDensity, SymmetricState,
};
pub use error::{Error, Result};
pub use fock::{clone_amplitude, enumerate_sector, log_factorial, OccupationVector, SectorBasis};
pub use ladder::{
    emission_probabilities, evolve, ladder_matrix, EvolutionProfile, LadderHamiltonian,
};
pub use reduction::{
    closed_form_global, closed_form_single, fidelity_global, fidelity_single, reduce_to_single,
    shrinking_factor, trace_out_b, Fraction, Shrinking, SingleQuditDensity,
};

pub use num_complex::Complex64;
