//! Spin bookkeeping, Wigner matrices and Euler-angle algebra.

mod euler;
mod operators;
mod wigner;

pub use euler::{
    compose_euler, composition_invariants, euler_from_su2, exact_euler_from_su2, gaussian_decompose,
    invert_euler, su2_matrix, triple_cos_theta, CoverSign, EulerAngles, GaussianFactors, RotationInvariants,
};
pub use operators::{
    conjugate_by_rotation, conjugate_spin_ops, ladder_factor, spin_operators, SpinOperators,
};
pub use wigner::{big_r, little_d, RotationMatrix};
pub(crate) use wigner::ln_factorial;

use serde::{Deserialize, Serialize};
use std::fmt;

/// A spin quantum number stored as the integer `2s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Spin {
    pub two_s: u32,
}

impl Spin {
    pub const fn new(two_s: u32) -> Self {
        Spin { two_s }
    }

    /// Spin `s = n/2`.
    pub const fn half(n: u32) -> Self {
        Spin { two_s: n }
    }

    pub fn s(self) -> f64 {
        self.two_s as f64 / 2.0
    }

    /// Hilbert-space dimension `2s + 1`.
    pub fn dim(self) -> usize {
        self.two_s as usize + 1
    }

    /// `2m` of basis index `i` (index 0 is `m = s`).
    pub fn two_m(self, i: usize) -> i32 {
        self.two_s as i32 - 2 * i as i32
    }

    pub fn m(self, i: usize) -> f64 {
        self.two_m(i) as f64 / 2.0
    }

    /// Basis index of `2m`, if it is a valid weight.
    pub fn index_of(self, two_m: i32) -> Option<usize> {
        let ts = self.two_s as i32;
        if two_m.abs() > ts || (ts - two_m) % 2 != 0 {
            None
        } else {
            Some(((ts - two_m) / 2) as usize)
        }
    }

    /// Index of the lowest weight `m = −s`.
    pub fn lowest(self) -> usize {
        self.two_s as usize
    }

    pub fn is_half_integer(self) -> bool {
        self.two_s % 2 == 1
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.two_s.is_multiple_of(2) {
            write!(f, "{}", self.two_s / 2)
        } else {
            write!(f, "{}/2", self.two_s)
        }
    }
}
