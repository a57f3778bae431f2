//! Hamiltonians, the exact time-ordered propagator, the discrete coherent-state
//! path integral and actions along paths.

mod action;
mod cspi;
mod exact;
mod hamiltonian;

pub use action::{action_along_path, discrete_action, infinitesimal_overlap};
pub use cspi::{
    discrete_cspi, oracle_amplitude, transition_amplitude, GridSpec, KernelMode, PropagatorResult, Schedule,
};
pub use exact::{exact_propagator, midpoint_propagator};
pub use hamiltonian::{h_expectation, h_ratio, hamiltonian_matrix, HamiltonianSpec, Profile, Term};

/// Overlaps with modulus at or below this are treated as orthogonal.
pub const ORTHOGONAL_CUTOFF: f64 = 1e-12;
