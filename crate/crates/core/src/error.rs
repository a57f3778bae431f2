use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not in SU(2): unitarity/determinant deviation {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("Gaussian decomposition is singular at theta = pi (theta = {theta})")]
    DecompositionPole { theta: f64 },

    #[error("fiducial vector has zero norm")]
    ZeroVector,

    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("spins differ: 2s = {left} vs 2s = {right}")]
    SpinMismatch { left: u32, right: u32 },

    #[error("quadrature grid is exact only up to 2s = {exact_two_s}, needed 2s = {needed_two_s} (residual {residual:e})")]
    GridTooCoarse {
        residual: f64,
        exact_two_s: u32,
        needed_two_s: u32,
    },

    #[error("path needs at least 2 samples, got {len}")]
    PathTooShort { len: usize },

    #[error("subsidiary condition |z+| = |z-| violated: {plus} vs {minus}")]
    SubsidiaryViolation { plus: f64, minus: f64 },

    #[error("SU(2) pair is not normalized: |a1|^2 + |a2|^2 = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("z-chart kinetic term is singular at the origin (|z+| = {z_plus:e})")]
    ZOriginSingular { z_plus: f64 },

    #[error("Hamiltonian is not Hermitian at t = {t} (deviation {deviation:e})")]
    NotHermitian { deviation: f64, t: f64 },

    #[error("coherent states are (numerically) orthogonal: |overlap| = {overlap:e}")]
    OrthogonalPair { overlap: f64 },

    #[error("time-ordered exponential did not converge after {halvings} halvings (last change {change:e})")]
    NoConvergence { halvings: u32, change: f64 },

    #[error("velocity system is inconsistent: residual {residual:e} for |b| = {rhs_norm:e}{}", at_time(.time))]
    InconsistentSystem {
        residual: f64,
        rhs_norm: f64,
        time: Option<f64>,
    },

    #[error("|z+| = {z_plus} exceeds the contraction pole margin {margin}")]
    PoleMargin { z_plus: f64, margin: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn at_time(time: &Option<f64>) -> String {
    match time {
        Some(t) => format!(" at t = {t}"),
        None => String::new(),
    }
}
