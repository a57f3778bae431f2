use super::{exact_propagator, HamiltonianSpec, ORTHOGONAL_CUTOFF};
use crate::coherent::{frame_operator, grid_states, measure_factor, state_amplitudes, FiducialVector, QuadratureGrid};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::spin_core::EulerAngles;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Short-time kernel used between neighbouring slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelMode {
    /// `⟨Ω_j|(1 − iεH/ħ)|Ω_{j−1}⟩`
    M1,
    /// `⟨Ω_j|Ω_{j−1}⟩ (1 − iε H(Ω_j, Ω_{j−1})/ħ)`
    M2,
    /// `exp(ln⟨Ω_j|Ω_{j−1}⟩) exp(−iε H(Ω_j, Ω_{j−1})/ħ)`
    M3,
}

impl KernelMode {
    pub const ALL: [KernelMode; 3] = [KernelMode::M1, KernelMode::M2, KernelMode::M3];
}

impl fmt::Display for KernelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KernelMode::M1 => "M1",
            KernelMode::M2 => "M2",
            KernelMode::M3 => "M3",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for KernelMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M1" | "m1" => Ok(KernelMode::M1),
            "M2" | "m2" => Ok(KernelMode::M2),
            "M3" | "m3" => Ok(KernelMode::M3),
            other => Err(Error::InvalidArgument(format!("unknown kernel mode {other:?}"))),
        }
    }
}

/// Node counts of the product grid used for every intermediate integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_psi: usize,
}

impl From<&QuadratureGrid> for GridSpec {
    fn from(g: &QuadratureGrid) -> Self {
        GridSpec {
            n_theta: g.n_theta,
            n_phi: g.n_phi,
            n_psi: g.n_psi,
        }
    }
}

/// Time window, number of kernel factors and `ħ`.
///
/// `n_slices` kernel factors split `[t_i, t_f]` into steps of
/// `ε = (t_f − t_i)/n_slices`; there are `n_slices − 1` intermediate
/// integrations and the Hamiltonian of step `j` is sampled at `t_{j−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub t_i: f64,
    pub t_f: f64,
    pub n_slices: usize,
    pub hbar: f64,
}

impl Schedule {
    pub fn new(t_i: f64, t_f: f64, n_slices: usize) -> Self {
        Schedule {
            t_i,
            t_f,
            n_slices,
            hbar: 1.0,
        }
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn epsilon(&self) -> f64 {
        (self.t_f - self.t_i) / self.n_slices as f64
    }

    /// Left end of step `j` (1-based).
    pub fn step_time(&self, j: usize) -> f64 {
        self.t_i + (j - 1) as f64 * self.epsilon()
    }

    fn validate(&self) -> Result<()> {
        if self.n_slices == 0 {
            return Err(Error::InvalidArgument("n_slices must be at least 1".into()));
        }
        if !(self.t_f >= self.t_i) {
            return Err(Error::InvalidArgument(format!("t_f = {} precedes t_i = {}", self.t_f, self.t_i)));
        }
        if !(self.hbar > 0.0) {
            return Err(Error::InvalidArgument(format!("hbar must be positive, got {}", self.hbar)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatorResult {
    pub amplitude: C64,
    pub n_slices: usize,
    pub mode: KernelMode,
    pub grid: GridSpec,
    /// `|amplitude − oracle|` once an oracle value has been attached.
    pub error_estimate: Option<f64>,
    /// Kernel evaluations skipped because the overlap was below the cutoff.
    pub zeroed_pairs: u64,
}

impl PropagatorResult {
    pub fn with_oracle(mut self, exact: C64) -> Self {
        self.error_estimate = Some((self.amplitude - exact).norm());
        self
    }
}

/// `⟨Ω_f| T exp(−i∫H dt/ħ) |Ω_i⟩` from the exact propagator.
pub fn oracle_amplitude(
    fv: &FiducialVector,
    spec: &HamiltonianSpec,
    omega_i: EulerAngles,
    omega_f: EulerAngles,
    schedule: &Schedule,
    tol: f64,
) -> Result<C64> {
    let u = exact_propagator(&spec.scaled(1.0 / schedule.hbar), schedule.t_i, schedule.t_f, tol)?;
    let vi = state_amplitudes(fv, omega_i);
    let vf = state_amplitudes(fv, omega_f);
    Ok(vf.dotc(&(u * vi)))
}

fn check_inputs(fv: &FiducialVector, spec: &HamiltonianSpec, grid: &QuadratureGrid, schedule: &Schedule) -> Result<()> {
    schedule.validate()?;
    if fv.spin() != spec.spin() {
        return Err(Error::SpinMismatch {
            left: fv.spin().two_s,
            right: spec.spin().two_s,
        });
    }
    if !grid.is_exact_for(fv.spin()) {
        return Err(Error::GridTooCoarse {
            residual: f64::NAN,
            exact_two_s: grid.exact_two_s(),
            needed_two_s: fv.spin().two_s,
        });
    }
    Ok(())
}

/// Kernel value from the overlap `o = ⟨a|b⟩` and matrix element `m = ⟨a|H|b⟩`,
/// with `step = ε/ħ`. `None` marks an orthogonal pair in the ratio modes.
fn kernel(mode: KernelMode, o: C64, m: C64, step: f64) -> Option<C64> {
    let minus_i_step = C64::new(0.0, -step);
    match mode {
        KernelMode::M1 => Some(o + minus_i_step * m),
        KernelMode::M2 | KernelMode::M3 if o.norm() <= ORTHOGONAL_CUTOFF => None,
        KernelMode::M2 => Some(o * (C64::new(1.0, 0.0) + minus_i_step * (m / o))),
        KernelMode::M3 => Some((o.ln() + minus_i_step * (m / o)).exp()),
    }
}

/// Kernel row `k(a, g)` for a fixed bra `a` against every grid ket `g`.
fn kernel_row(mode: KernelMode, bra: &CVector, kets: &[CVector], h_kets: &[CVector], step: f64) -> (Vec<C64>, u64) {
    let mut zeroed = 0;
    let row = kets
        .iter()
        .zip(h_kets)
        .map(|(k, hk)| match kernel(mode, bra.dotc(k), bra.dotc(hk), step) {
            Some(v) => v,
            None => {
                zeroed += 1;
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    (row, zeroed)
}

// Contract the chain on grid functions: `values[g]` holds the partial
// amplitude for a path ending at grid node `g`.
struct GridChain<'a> {
    mode: KernelMode,
    spec: &'a HamiltonianSpec,
    schedule: &'a Schedule,
    states: Vec<CVector>,
    weights: Vec<f64>,
    zeroed: u64,
}

impl<'a> GridChain<'a> {
    fn new(
        fv: &FiducialVector,
        spec: &'a HamiltonianSpec,
        grid: &QuadratureGrid,
        schedule: &'a Schedule,
        mode: KernelMode,
    ) -> Self {
        let dmu = measure_factor(fv.spin());
        let weights = (0..grid.len()).map(|idx| grid.weight(grid.split(idx).0) * dmu).collect();
        GridChain {
            mode,
            spec,
            schedule,
            states: grid_states(fv, grid),
            weights,
            zeroed: 0,
        }
    }

    fn step(&self) -> f64 {
        self.schedule.epsilon() / self.schedule.hbar
    }

    fn h_applied(&self, kets: &[CVector], t: f64) -> Vec<CVector> {
        let h = self.spec.matrix(t);
        kets.iter().map(|k| &h * k).collect()
    }

    /// `k_j(g, ket)` for every grid node `g`, step `j` evaluated at `t`.
    fn column(&mut self, ket: &CVector, t: f64) -> Vec<C64> {
        let hk = &self.spec.matrix(t) * ket;
        let step = self.step();
        let mut zeroed = 0;
        let col = self
            .states
            .iter()
            .map(|g| match kernel(self.mode, g.dotc(ket), g.dotc(&hk), step) {
                Some(v) => v,
                None => {
                    zeroed += 1;
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        self.zeroed += zeroed;
        col
    }

    /// `Σ_g k_j(bra, g) w_g values[g]`.
    fn close(&mut self, bra: &CVector, values: &[C64], t: f64) -> C64 {
        let h_states = self.h_applied(&self.states, t);
        let (row, zeroed) = kernel_row(self.mode, bra, &self.states, &h_states, self.step());
        self.zeroed += zeroed;
        row.iter()
            .zip(&self.weights)
            .zip(values)
            .fold(C64::new(0.0, 0.0), |acc, ((k, w), v)| acc + k * (w * v))
    }

    /// One intermediate integration: `values'[g] = Σ_g' k_j(g, g') w_g' values[g']`.
    fn advance(&mut self, values: &[C64], t: f64) -> Vec<C64> {
        let h_states = self.h_applied(&self.states, t);
        let step = self.step();
        let weighted: Vec<C64> = values.iter().zip(&self.weights).map(|(v, w)| v * *w).collect();
        let rows: Vec<(C64, u64)> = self
            .states
            .par_iter()
            .map(|bra| {
                let (row, zeroed) = kernel_row(self.mode, bra, &self.states, &h_states, step);
                let acc = row
                    .iter()
                    .zip(&weighted)
                    .fold(C64::new(0.0, 0.0), |acc, (k, v)| acc + k * v);
                (acc, zeroed)
            })
            .collect();
        self.zeroed += rows.iter().map(|r| r.1).sum::<u64>();
        rows.into_iter().map(|r| r.0).collect()
    }
}

// `(1 − iεH(t)/ħ)` for the linear kernel.
fn linear_step(spec: &HamiltonianSpec, t: f64, step: f64) -> CMatrix {
    let dim = spec.spin().dim();
    CMatrix::identity(dim, dim) + spec.matrix(t) * C64::new(0.0, -step)
}

/// Applies the full chain to a ket: with `P = Σ w dμ |g⟩⟨g|` the linear kernel
/// contracts to `A_n P A_{n−1} ⋯ P A_1`, one `(2s+1)`-dimensional transfer
/// matrix per slice.
fn linear_chain(frame: &CMatrix, spec: &HamiltonianSpec, schedule: &Schedule, ket: &CVector) -> CVector {
    let step = schedule.epsilon() / schedule.hbar;
    let mut v = linear_step(spec, schedule.step_time(1), step) * ket;
    for j in 2..=schedule.n_slices {
        v = linear_step(spec, schedule.step_time(j), step) * (frame * v);
    }
    v
}

/// The time-sliced coherent-state path integral `K(Ω_f, t_f; Ω_i, t_i)` with
/// every intermediate integral replaced by the exact grid sum.
///
/// `M1` is contracted through `(2s+1)`-dimensional transfer matrices. The
/// ratio modes are not linear in the kets, so they are contracted on grid
/// functions (`O(n·G²)` kernel evaluations for a grid of `G` nodes).
#[allow(clippy::too_many_arguments)]
pub fn discrete_cspi(
    fv: &FiducialVector,
    spec: &HamiltonianSpec,
    omega_i: EulerAngles,
    omega_f: EulerAngles,
    schedule: &Schedule,
    grid: &QuadratureGrid,
    mode: KernelMode,
) -> Result<PropagatorResult> {
    check_inputs(fv, spec, grid, schedule)?;
    let ket_i = state_amplitudes(fv, omega_i);
    let bra_f = state_amplitudes(fv, omega_f);
    let n = schedule.n_slices;
    let (amplitude, zeroed_pairs) = match mode {
        KernelMode::M1 => {
            let frame = frame_operator(fv, grid);
            (bra_f.dotc(&linear_chain(&frame, spec, schedule, &ket_i)), 0)
        }
        KernelMode::M2 | KernelMode::M3 => {
            let mut chain = GridChain::new(fv, spec, grid, schedule, mode);
            if n == 1 {
                let h_ket = spec.matrix(schedule.t_i) * &ket_i;
                let amp = kernel(mode, bra_f.dotc(&ket_i), bra_f.dotc(&h_ket), chain.step());
                (amp.unwrap_or(C64::new(0.0, 0.0)), u64::from(amp.is_none()))
            } else {
                let mut values = chain.column(&ket_i, schedule.step_time(1));
                for j in 2..n {
                    values = chain.advance(&values, schedule.step_time(j));
                }
                let amp = chain.close(&bra_f, &values, schedule.step_time(n));
                (amp, chain.zeroed)
            }
        }
    };
    Ok(PropagatorResult {
        amplitude,
        n_slices: n,
        mode,
        grid: GridSpec::from(grid),
        error_estimate: None,
        zeroed_pairs,
    })
}

fn normalized_check(v: &CVector) -> Result<()> {
    let norm_sq = v.norm_squared();
    if (norm_sq - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

/// `∫∫ dμ(Ω_f) dμ(Ω_i) ⟨f|Ω_f⟩ K(Ω_f, t_f; Ω_i, t_i) ⟨Ω_i|i⟩` with both
/// endpoint integrals done on the grid.
pub fn transition_amplitude(
    fv: &FiducialVector,
    spec: &HamiltonianSpec,
    ket_i: &CVector,
    ket_f: &CVector,
    schedule: &Schedule,
    grid: &QuadratureGrid,
    mode: KernelMode,
) -> Result<PropagatorResult> {
    check_inputs(fv, spec, grid, schedule)?;
    let dim = fv.spin().dim();
    for v in [ket_i, ket_f] {
        if v.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        normalized_check(v)?;
    }
    let n = schedule.n_slices;
    let (amplitude, zeroed_pairs) = match mode {
        KernelMode::M1 => {
            let frame = frame_operator(fv, grid);
            let v = linear_chain(&frame, spec, schedule, &(&frame * ket_i));
            (ket_f.dotc(&(&frame * v)), 0)
        }
        KernelMode::M2 | KernelMode::M3 => {
            let mut chain = GridChain::new(fv, spec, grid, schedule, mode);
            // ⟨g|i⟩ on the grid, then n kernel factors, then Σ ⟨f|g⟩ w.
            let mut values: Vec<C64> = chain.states.iter().map(|g| g.dotc(ket_i)).collect();
            for j in 1..=n {
                values = chain.advance(&values, schedule.step_time(j));
            }
            let amp = chain
                .states
                .iter()
                .zip(&chain.weights)
                .zip(&values)
                .fold(C64::new(0.0, 0.0), |acc, ((g, w), v)| acc + ket_f.dotc(g) * (w * v));
            (amp, chain.zeroed)
        }
    };
    Ok(PropagatorResult {
        amplitude,
        n_slices: n,
        mode,
        grid: GridSpec::from(grid),
        error_estimate: None,
        zeroed_pairs,
    })
}
