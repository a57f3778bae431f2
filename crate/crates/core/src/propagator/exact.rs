use super::HamiltonianSpec;
use crate::error::{Error, Result};
use crate::linalg::{expm, op_norm, CMatrix, C64};

const MAX_HALVINGS: u32 = 24;

fn midpoint_product(spec: &HamiltonianSpec, t_i: f64, t_f: f64, steps: usize) -> CMatrix {
    let dim = spec.spin().dim();
    let dt = (t_f - t_i) / steps as f64;
    let mut u = CMatrix::identity(dim, dim);
    for k in 0..steps {
        let t_mid = t_i + (k as f64 + 0.5) * dt;
        let step = expm(&(spec.matrix(t_mid) * C64::new(0.0, -dt)));
        u = step * u;
    }
    u
}

/// Time-ordered `T exp(−i ∫ H dt)` by midpoint exponentials with step
/// doubling until two successive products differ by less than `tol`.
pub fn exact_propagator(spec: &HamiltonianSpec, t_i: f64, t_f: f64, tol: f64) -> Result<CMatrix> {
    if t_f < t_i {
        return Err(Error::InvalidArgument(format!("t_f = {t_f} precedes t_i = {t_i}")));
    }
    let dim = spec.spin().dim();
    if t_f == t_i {
        return Ok(CMatrix::identity(dim, dim));
    }
    if spec.is_time_independent() {
        return Ok(expm(&(spec.matrix(t_i) * C64::new(0.0, -(t_f - t_i)))));
    }
    let mut steps = 1usize;
    let mut prev = midpoint_product(spec, t_i, t_f, steps);
    let mut change = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        steps *= 2;
        let next = midpoint_product(spec, t_i, t_f, steps);
        change = op_norm(&(&next - &prev));
        if change < tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NoConvergence {
        halvings: MAX_HALVINGS,
        change,
    })
}

/// Midpoint product with a fixed number of steps (for convergence studies).
pub fn midpoint_propagator(spec: &HamiltonianSpec, t_i: f64, t_f: f64, steps: usize) -> CMatrix {
    midpoint_product(spec, t_i, t_f, steps.max(1))
}
