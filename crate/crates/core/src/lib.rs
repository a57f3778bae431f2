//! SU(2) coherent states generated from arbitrary fiducial vectors.
//!
//! The crate covers the full chain from exact Wigner matrices up to discrete
//! coherent-state path integrals:
//!
//! - [`spin_core`]: spin bookkeeping, Wigner `d`/`R` matrices, Euler-angle algebra.
//! - [`coherent`]: fiducial vectors, coherent states `|Ω⟩ = R(Ω)|Ψ₀⟩`, overlaps,
//!   matrix elements, exact quadrature and the resolution of unity.
//! - [`geometry`]: the topological 1-form, its exterior derivative, gauge potentials
//!   and geometric-phase line integrals.
//! - [`parametrizations`]: Gaussian-decomposition (`z`) and SU(2)-pair (`a`) charts.
//! - [`propagator`]: Hamiltonians, the exact time-ordered propagator and the
//!   transfer-matrix contraction of the discrete path integral.
//! - [`semiclassical`]: the Euler–Lagrange velocity system and its integration.
//! - [`contraction`]: canonical coherent states, displaced number states and the
//!   Holstein–Primakoff high-spin limit.
//!
//! Conventions: `ħ = 1` unless a function takes an explicit `hbar`; basis vectors
//! are ordered with `m` descending (`m = s` first); half-integers are stored doubled.

pub mod coherent;
pub mod contraction;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod parametrizations;
pub mod propagator;
pub mod random;
pub mod semiclassical;
pub mod spin_core;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
