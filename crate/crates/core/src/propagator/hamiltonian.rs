use crate::coherent::{state_amplitudes, FiducialVector};
use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, CMatrix, C64};
use crate::spin_core::{spin_operators, EulerAngles, Spin, SpinOperators};
use serde::{Deserialize, Serialize};

/// Time dependence multiplying one monomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Constant,
    /// `cos(ω t + phase)`
    Cosine { omega: f64, phase: f64 },
    /// `intercept + slope · t`
    LinearRamp { slope: f64, intercept: f64 },
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant => 1.0,
            Profile::Cosine { omega, phase } => (omega * t + phase).cos(),
            Profile::LinearRamp { slope, intercept } => intercept + slope * t,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Profile::Constant)
    }
}

/// `coeff · profile(t) · S₊^p S₃^q S₋^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    #[serde(with = "complex_pair")]
    pub coeff: C64,
    #[serde(default = "constant_profile")]
    pub profile: Profile,
}

fn constant_profile() -> Profile {
    Profile::Constant
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

impl Term {
    pub fn constant(p: u32, q: u32, r: u32, coeff: C64) -> Self {
        Term {
            p,
            q,
            r,
            coeff,
            profile: Profile::Constant,
        }
    }

    pub fn degree(&self) -> u32 {
        self.p + self.q + self.r
    }

    fn operator(&self, ops: &SpinOperators) -> CMatrix {
        let dim = ops.spin.dim();
        let mut m = CMatrix::identity(dim, dim);
        for _ in 0..self.p {
            m = &m * &ops.s_plus;
        }
        for _ in 0..self.q {
            m = &m * &ops.s3;
        }
        for _ in 0..self.r {
            m = &m * &ops.s_minus;
        }
        m
    }
}

/// A Hamiltonian given as a sum of normal-ordered monomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct HamiltonianSpec {
    spin: Spin,
    terms: Vec<Term>,
    operators: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    two_s: u32,
    terms: Vec<Term>,
}

impl TryFrom<RawSpec> for HamiltonianSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        HamiltonianSpec::new(Spin::new(r.two_s), r.terms)
    }
}

impl From<HamiltonianSpec> for RawSpec {
    fn from(h: HamiltonianSpec) -> Self {
        RawSpec {
            two_s: h.spin.two_s,
            terms: h.terms,
        }
    }
}

// Times at which Hermiticity is validated.
const CHECK_TIMES: [f64; 6] = [0.0, 0.33, 1.0, 2.71, 7.3, -4.1];

impl HamiltonianSpec {
    /// Builds the term matrices and rejects specs that are not Hermitian.
    pub fn new(spin: Spin, terms: Vec<Term>) -> Result<Self> {
        let ops = spin_operators(spin);
        let operators = terms.iter().map(|t| t.operator(&ops)).collect();
        let spec = HamiltonianSpec {
            spin,
            terms,
            operators,
        };
        for &t in &CHECK_TIMES {
            let h = spec.matrix(t);
            let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let deviation = hermiticity_defect(&h);
            if deviation > 1e-12 * scale {
                return Err(Error::NotHermitian { deviation, t });
            }
        }
        Ok(spec)
    }

    pub fn zero(spin: Spin) -> Self {
        HamiltonianSpec::new(spin, Vec::new()).expect("empty spec is Hermitian")
    }

    /// `ω·S₃`.
    pub fn precession(spin: Spin, omega: f64) -> Self {
        HamiltonianSpec::new(spin, vec![Term::constant(0, 1, 0, C64::new(omega, 0.0))])
            .expect("ω S₃ is Hermitian")
    }

    /// `c₃ S₃ + c₁ S₁ + c₂ S₂` with constant real coefficients.
    pub fn linear(spin: Spin, c3: f64, c1: f64, c2: f64) -> Self {
        // S₁ = (S₊ + S₋)/2, S₂ = (S₊ − S₋)/(2i)
        let plus = C64::new(c1 / 2.0, -c2 / 2.0);
        let minus = C64::new(c1 / 2.0, c2 / 2.0);
        HamiltonianSpec::new(
            spin,
            vec![
                Term::constant(0, 1, 0, C64::new(c3, 0.0)),
                Term::constant(1, 0, 0, plus),
                Term::constant(0, 0, 1, minus),
            ],
        )
        .expect("real linear combination of spin components is Hermitian")
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.degree()).max().unwrap_or(0)
    }

    pub fn is_time_independent(&self) -> bool {
        self.terms.iter().all(|t| t.profile.is_constant())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == C64::new(0.0, 0.0))
    }

    /// Multiply every coefficient by a real factor.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= factor;
        }
        out
    }

    /// `H(t)` as a dense matrix.
    pub fn matrix(&self, t: f64) -> CMatrix {
        let dim = self.spin.dim();
        let mut h = CMatrix::zeros(dim, dim);
        for (term, op) in self.terms.iter().zip(&self.operators) {
            h += op * (term.coeff * term.profile.value(t));
        }
        h
    }
}

/// `H(t)` as a dense matrix.
pub fn hamiltonian_matrix(spec: &HamiltonianSpec, t: f64) -> CMatrix {
    spec.matrix(t)
}

fn check_spin(fv: &FiducialVector, spec: &HamiltonianSpec) -> Result<()> {
    if fv.spin() != spec.spin() {
        Err(Error::SpinMismatch {
            left: fv.spin().two_s,
            right: spec.spin().two_s,
        })
    } else {
        Ok(())
    }
}

/// `H(Ω, t) = ⟨Ω|H(t)|Ω⟩`.
pub fn h_expectation(fv: &FiducialVector, spec: &HamiltonianSpec, omega: EulerAngles, t: f64) -> Result<f64> {
    check_spin(fv, spec)?;
    let v = state_amplitudes(fv, omega);
    Ok(v.dotc(&(spec.matrix(t) * &v)).re)
}

/// `⟨Ω″|H(t)|Ω′⟩ / ⟨Ω″|Ω′⟩`.
pub fn h_ratio(
    fv: &FiducialVector,
    spec: &HamiltonianSpec,
    omega2: EulerAngles,
    omega1: EulerAngles,
    t: f64,
) -> Result<C64> {
    check_spin(fv, spec)?;
    let v2 = state_amplitudes(fv, omega2);
    let v1 = state_amplitudes(fv, omega1);
    let ov = v2.dotc(&v1);
    if ov.norm() <= super::ORTHOGONAL_CUTOFF {
        return Err(Error::OrthogonalPair { overlap: ov.norm() });
    }
    Ok(v2.dotc(&(spec.matrix(t) * v1)) / ov)
}
