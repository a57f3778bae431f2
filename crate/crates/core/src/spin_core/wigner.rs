use super::{EulerAngles, Spin};
use crate::linalg::{cis, CMatrix};
use nalgebra::DMatrix;
use std::sync::OnceLock;

/// `R(Ω)` in the `|s, m⟩` basis, rows and columns m-descending.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    pub spin: Spin,
    pub entries: CMatrix,
}

// Exact factorials are used up to 2s = 30 (30! < 2^128), log factorials beyond.
const EXACT_LIMIT: u32 = 30;

fn factorial_u128(n: u32) -> u128 {
    (1..=n as u128).product()
}

pub(crate) fn ln_factorial(n: u32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; 4097];
        for k in 1..t.len() {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    });
    match table.get(n as usize) {
        Some(v) => *v,
        None => (1..=n).map(|k| (k as f64).ln()).sum(),
    }
}

/// Wigner small-d matrix `r_{m m'}(θ) = ⟨m| e^{−iθ S₂} |m'⟩`.
///
/// Evaluated with the finite alternating sum over `t`; the sum runs over
/// exactly those `t` for which every factorial argument is non-negative.
pub fn little_d(spin: Spin, theta: f64) -> DMatrix<f64> {
    let dim = spin.dim();
    let ch = (theta / 2.0).cos();
    let sh = (theta / 2.0).sin();
    let mut d = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            d[(i, j)] = d_entry(spin, i, j, ch, sh);
        }
    }
    d
}

/// One entry of the small-d matrix, given `cos(θ/2)` and `sin(θ/2)`.
pub(crate) fn d_entry(spin: Spin, i: usize, j: usize, ch: f64, sh: f64) -> f64 {
    let ts = spin.two_s as i64;
    // Row weight m, column weight m'; only the integers s ± m, s ± m', m − m' appear.
    let two_m = spin.two_m(i) as i64;
    let two_mp = spin.two_m(j) as i64;
    let jpm = (ts + two_m) / 2; // s + m
    let jmm = (ts - two_m) / 2; // s − m
    let jpmp = (ts + two_mp) / 2; // s + m'
    let jmmp = (ts - two_mp) / 2; // s − m'
    let dm = (two_m - two_mp) / 2; // m − m'

    let t_min = 0.max(-dm);
    let t_max = jpmp.min(jmm);
    if t_min > t_max {
        return 0.0;
    }
    let mut sum = 0.0;
    for t in t_min..=t_max {
        // Factorial arguments: (s+m'−t)!, t!, (m−m'+t)!, (s−m−t)!.
        let f1 = (jpmp - t) as u32;
        let f2 = t as u32;
        let f3 = (dm + t) as u32;
        let f4 = (jmm - t) as u32;
        // Exponents: cos^(2s − (m − m') − 2t), sin^((m − m') + 2t).
        let p_cos = (ts - dm - 2 * t) as i32;
        let p_sin = (dm + 2 * t) as i32;
        let sign = if (dm + t) % 2 == 0 { 1.0 } else { -1.0 };
        let mag = if spin.two_s <= EXACT_LIMIT {
            let num = (factorial_u128(jpm as u32) * factorial_u128(jmm as u32)) as f64;
            let num2 = (factorial_u128(jpmp as u32) * factorial_u128(jmmp as u32)) as f64;
            let den = factorial_u128(f1)
                * factorial_u128(f2)
                * factorial_u128(f3)
                * factorial_u128(f4);
            num.sqrt() * num2.sqrt() / den as f64 * powi0(ch, p_cos) * powi0(sh, p_sin)
        } else {
            // √[(s+m)!(s−m)!/((s+m')!(s−m')!)] · C(s+m', t) · C(s−m', s−m−t)
            let ln_ratio = (ln_factorial(jpm as u32) - ln_factorial(jpmp as u32))
                + (ln_factorial(jmm as u32) - ln_factorial(jmmp as u32));
            let ln_coef = 0.5 * ln_ratio
                + ln_binomial(jpmp as u32, f2)
                + ln_binomial(jmmp as u32, f4);
            match (ln_pow(ch, p_cos), ln_pow(sh, p_sin)) {
                (Some((lc, sc)), Some((ls, ss))) => sc * ss * (ln_coef + lc + ls).exp(),
                _ => 0.0,
            }
        };
        sum += sign * mag;
    }
    sum
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

// x^p with 0^0 = 1.
fn powi0(x: f64, p: i32) -> f64 {
    if p == 0 {
        1.0
    } else {
        x.powi(p)
    }
}

// (ln|x^p|, sign(x^p)); None when the power vanishes.
fn ln_pow(x: f64, p: i32) -> Option<(f64, f64)> {
    if p == 0 {
        return Some((0.0, 1.0));
    }
    if x == 0.0 {
        return None;
    }
    let sign = if x < 0.0 && p % 2 == 1 { -1.0 } else { 1.0 };
    Some((p as f64 * x.abs().ln(), sign))
}

/// `R_{m m'}(Ω) = e^{−iφm} r_{m m'}(θ) e^{−iψm'}`.
pub fn big_r(spin: Spin, omega: EulerAngles) -> RotationMatrix {
    let d = little_d(spin, omega.theta());
    let dim = spin.dim();
    let left: Vec<_> = (0..dim).map(|i| cis(-omega.phi() * spin.m(i))).collect();
    let right: Vec<_> = (0..dim).map(|j| cis(-omega.psi() * spin.m(j))).collect();
    let entries = CMatrix::from_fn(dim, dim, |i, j| left[i] * d[(i, j)] * right[j]);
    RotationMatrix { spin, entries }
}

impl RotationMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn adjoint(&self) -> CMatrix {
        self.entries.adjoint()
    }
}
