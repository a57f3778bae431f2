use super::{big_r, EulerAngles, Spin};
use crate::linalg::{cis, CMatrix, C64};

/// `S₃`, `S₊`, `S₋` as dense matrices in the m-descending basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub spin: Spin,
    pub s3: CMatrix,
    pub s_plus: CMatrix,
    pub s_minus: CMatrix,
}

impl SpinOperators {
    pub fn s1(&self) -> CMatrix {
        (&self.s_plus + &self.s_minus) * C64::new(0.5, 0.0)
    }

    pub fn s2(&self) -> CMatrix {
        (&self.s_plus - &self.s_minus) * C64::new(0.0, -0.5)
    }
}

/// `f(s, m) = √((s+m)(s−m+1))`, the magnitude in `S₊|m−1⟩ = f(s,m)|m⟩`.
pub fn ladder_factor(spin: Spin, two_m: i32) -> f64 {
    let ts = spin.two_s as i64;
    let tm = two_m as i64;
    // (s+m)(s−m+1) = (2s+2m)(2s−2m+2)/4
    let prod = (ts + tm) * (ts - tm + 2);
    if prod <= 0 {
        0.0
    } else {
        (prod as f64).sqrt() / 2.0
    }
}

pub fn spin_operators(spin: Spin) -> SpinOperators {
    let dim = spin.dim();
    let s3 = CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new(spin.m(i), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    // Row i holds m_i; S₊ maps column i+1 (weight m_i − 1) into row i.
    let s_plus = CMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            C64::new(ladder_factor(spin, spin.two_m(i)), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let s_minus = s_plus.transpose();
    SpinOperators {
        spin,
        s3,
        s_plus,
        s_minus,
    }
}

/// `R†S₃R` and `R†S±R` from their closed forms in `S₃, S±`.
pub fn conjugate_spin_ops(omega: EulerAngles, spin: Spin) -> SpinOperators {
    let ops = spin_operators(spin);
    let (phi, theta, psi) = (omega.phi(), omega.theta(), omega.psi());
    let (st, ct) = theta.sin_cos();
    let ep = cis(psi);
    let em = cis(-psi);
    let half = C64::new(0.5, 0.0);

    let s3 = &ops.s3 * C64::from(ct) - (&ops.s_plus * ep + &ops.s_minus * em) * (half * st);
    let plus = (&ops.s3 * C64::from(st)
        + (&ops.s_plus * (ep * (ct + 1.0)) + &ops.s_minus * (em * (ct - 1.0))) * half)
        * cis(phi);
    let minus = (&ops.s3 * C64::from(st)
        + (&ops.s_plus * (ep * (ct - 1.0)) + &ops.s_minus * (em * (ct + 1.0))) * half)
        * cis(-phi);
    SpinOperators {
        spin,
        s3,
        s_plus: plus,
        s_minus: minus,
    }
}

/// `R†·X·R` by explicit matrix products.
pub fn conjugate_by_rotation(x: &CMatrix, spin: Spin, omega: EulerAngles) -> CMatrix {
    let r = big_r(spin, omega).entries;
    r.adjoint() * x * r
}
