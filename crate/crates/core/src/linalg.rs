//! Dense complex linear algebra shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cis(angle: f64) -> C64 {
    C64::from_polar(1.0, angle)
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Max absolute column sum.
pub fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖M − 1‖` in the operator norm.
pub fn distance_from_identity(m: &CMatrix) -> f64 {
    let n = m.nrows();
    op_norm(&(m - CMatrix::identity(n, n)))
}

/// Largest deviation from Hermiticity, `max |M − M†|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

// Padé(13) coefficients of Higham's scaling-and-squaring scheme.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by Padé(13) scaling and squaring.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let id = CMatrix::identity(n, n);
    if n == 0 {
        return id;
    }
    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(0.5f64.powi(squarings));
    let b = |k: usize| C64::from(PADE13[k]);

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = &a * (&a6 * inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let inner_v = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = &a6 * inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is singular; input norm is not finite");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// `exp(x·N)` for nilpotent `N` via the terminating series.
pub fn expm_nilpotent(n: &CMatrix, x: C64) -> CMatrix {
    let dim = n.nrows();
    let mut out = CMatrix::identity(dim, dim);
    let xn = n * x;
    let mut term = CMatrix::identity(dim, dim);
    for k in 1..=dim {
        term = &term * &xn / C64::from(k as f64);
        if term.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            break;
        }
        out += &term;
    }
    out
}

/// Fixed chunk length for parallel reductions.
pub const CHUNK: usize = 64;

/// Sum `f(0) + … + f(n−1)` with a reduction tree that does not depend on the
/// number of worker threads: fixed-size chunks are summed left to right in
/// parallel, then the chunk totals are summed left to right.
pub fn deterministic_sum<T, F>(n: usize, zero: T, f: F) -> T
where
    T: Clone + Send + Sync + std::ops::AddAssign,
    F: Fn(usize) -> T + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let partials: Vec<T> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut acc = zero.clone();
            for i in (k * CHUNK)..((k + 1) * CHUNK).min(n) {
                acc += f(i);
            }
            acc
        })
        .collect();
    let mut total = zero;
    for p in partials {
        total += p;
    }
    total
}

/// `⟨a|b⟩` with the first argument conjugated.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

/// Principal square root of a complex number (branch cut on the negative real axis).
pub fn csqrt(z: C64) -> C64 {
    z.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eig_expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
        // exp(−i t H) through the real-symmetric embedding [[Re, −Im], [Im, Re]].
        let n = h.nrows();
        let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                big[(i, j)] = h[(i, j)].re;
                big[(i + n, j + n)] = h[(i, j)].re;
                big[(i, j + n)] = -h[(i, j)].im;
                big[(i + n, j)] = h[(i, j)].im;
            }
        }
        let eig = big.symmetric_eigen();
        let mut out = CMatrix::zeros(n, n);
        // Each eigenvalue of H appears twice in the embedding; the complex
        // eigenvectors are recovered as x + i y from the real pairs.
        for k in 0..2 * n {
            let v = eig.eigenvectors.column(k);
            let z: CVector = CVector::from_fn(n, |i, _| c(v[i], v[i + n]));
            let phase = cis(-t * eig.eigenvalues[k]);
            out += (&z * z.adjoint()) * phase;
        }
        // Each complex eigenvector is counted once as (x, y) and once as (−y, x).
        out / C64::from(2.0)
    }

    #[test]
    fn expm_matches_spectral_oracle() {
        let h = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.0, 0.0),
                c(0.3, -0.7),
                c(-0.2, 0.1),
                c(0.3, 0.7),
                c(-0.5, 0.0),
                c(0.9, 0.4),
                c(-0.2, -0.1),
                c(0.9, -0.4),
                c(2.2, 0.0),
            ],
        );
        for &t in &[0.01, 0.7, 3.0, 25.0] {
            let ours = expm(&(&h * c(0.0, -t)));
            let oracle = eig_expm_hermitian(&h, t);
            assert!(op_norm(&(ours - oracle)) < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = CMatrix::zeros(4, 4);
        assert!(distance_from_identity(&expm(&z)) == 0.0);
    }

    #[test]
    fn nilpotent_series_matches_expm() {
        let mut n = CMatrix::zeros(4, 4);
        n[(0, 1)] = c(1.0, 0.0);
        n[(1, 2)] = c(2.0, 0.5);
        n[(2, 3)] = c(-1.0, 1.0);
        let x = c(0.4, -1.2);
        let a = expm_nilpotent(&n, x);
        let b = expm(&(&n * x));
        assert!(op_norm(&(a - b)) < 1e-13);
    }

    #[test]
    fn deterministic_sum_is_thread_independent() {
        let f = |i: usize| (i as f64 * 0.37).sin() * 1e-3 + 1.0 / (i as f64 + 1.0);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| deterministic_sum(10_000, 0.0, f));
        let b = many.install(|| deterministic_sum(10_000, 0.0, f));
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
