//! Config ingestion: the JSON file, global keys and their flag overrides, and
//! resolution of the shared fields (fiducial vectors, angles, Hamiltonians).

use crate::{Command, GlobalFlags};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};
use std::fmt;
use std::path::{Path, PathBuf};
use su2cs::coherent::{FiducialFile, FiducialVector};
use su2cs::propagator::{HamiltonianSpec, Term};
use su2cs::random::{random_fiducial, seeded, SeededRng};
use su2cs::spin_core::{EulerAngles, Spin};
use su2cs::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<su2cs::Error> for ConfigError {
    fn from(e: su2cs::Error) -> Self {
        ConfigError(e.to_string())
    }
}

impl From<serde_json::Error> for ConfigError {
    fn from(e: serde_json::Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// A parsed invocation: command parameters with the global keys split off.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub params: Map<String, Value>,
    pub base_dir: PathBuf,
    pub seed: u64,
    pub hbar: f64,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
    pub out: PathBuf,
}

impl Invocation {
    pub fn load(command: &Command, flags: &GlobalFlags) -> Result<Self, ConfigError> {
        let (mut params, base_dir) = match &flags.config {
            Some(path) => (read_object(path)?, path.parent().map(Path::to_path_buf).unwrap_or_default()),
            None => (Map::new(), PathBuf::new()),
        };
        match command {
            Command::Wigner(w) => {
                let pairs = [
                    ("two_s", w.two_s.map(Value::from)),
                    ("phi", w.phi.map(Value::from)),
                    ("theta", w.theta.map(Value::from)),
                    ("psi", w.psi.map(Value::from)),
                ];
                for (key, value) in pairs {
                    if let Some(v) = value {
                        params.insert(key.to_string(), v);
                    }
                }
            }
            Command::Acceptance(_) => {}
            other if flags.config.is_none() => {
                return Err(invalid(format!("`{}` needs --config <path>", other.name())));
            }
            _ => {}
        }

        let seed = match params.remove("seed") {
            Some(v) => v.as_u64().ok_or_else(|| invalid("`seed` must be a non-negative integer"))?,
            None => 0,
        };
        let hbar = match params.remove("hbar") {
            Some(v) => v.as_f64().ok_or_else(|| invalid("`hbar` must be a number"))?,
            None => 1.0,
        };
        let threads = match params.remove("threads") {
            Some(v) => Some(v.as_u64().ok_or_else(|| invalid("`threads` must be a positive integer"))? as usize),
            None => None,
        };
        let out = match params.remove("out") {
            Some(Value::String(s)) => Some(base_dir.join(s)),
            Some(_) => return Err(invalid("`out` must be a path string")),
            None => None,
        };

        let inv = Invocation {
            params,
            base_dir,
            seed: flags.seed.unwrap_or(seed),
            hbar,
            tol: flags.tol,
            threads: flags.threads.or(threads),
            out: flags.out.clone().or(out).unwrap_or_else(|| PathBuf::from(".")),
        };
        if !(inv.hbar.is_finite() && inv.hbar > 0.0) {
            return Err(invalid(format!("`hbar` must be positive, got {}", inv.hbar)));
        }
        if inv.threads == Some(0) {
            return Err(invalid("`threads` must be at least 1"));
        }
        if let Some(t) = inv.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid(format!("--tol must be positive, got {t}")));
            }
        }
        Ok(inv)
    }

    /// Deserialize the command parameters; unknown keys are rejected by the
    /// target types.
    pub fn parse<T: DeserializeOwned>(&self) -> Result<T, ConfigError> {
        Ok(serde_json::from_value(Value::Object(self.params.clone()))?)
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub fn rng(&self) -> SeededRng {
        seeded(self.seed)
    }
}

fn read_object(path: &Path) -> Result<Map<String, Value>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(invalid(format!("{} is empty", path.display())));
    }
    match serde_json::from_str(&text)? {
        Value::Object(map) => Ok(map),
        _ => Err(invalid("config must be a JSON object")),
    }
}

/// A single value or a list of them.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    pub fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

pub fn angles(a: [f64; 3]) -> EulerAngles {
    EulerAngles::new(a[0], a[1], a[2])
}

pub fn complex(z: [f64; 2]) -> C64 {
    C64::new(z[0], z[1])
}

pub fn hamiltonian(spin: Spin, terms: Vec<Term>) -> Result<HamiltonianSpec, ConfigError> {
    Ok(HamiltonianSpec::new(spin, terms)?)
}

/// The `fv` field: `"lowest"`, `"highest"`, `"random"`, a path to a fiducial
/// file, or an inline object `{"coeffs": [[re, im], …]}` / `{"two_m": k}`
/// (either may repeat `"two_s"`).
pub fn fiducial(value: &Value, spin: Spin, inv: &Invocation, rng: &mut SeededRng) -> Result<FiducialVector, ConfigError> {
    let fv = match value {
        Value::String(s) => match s.as_str() {
            "lowest" => FiducialVector::lowest(spin),
            "highest" => FiducialVector::highest(spin),
            "random" => random_fiducial(rng, spin),
            path => {
                let full = inv.base_dir.join(path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| invalid(format!("cannot read fiducial file {}: {e}", full.display())))?;
                let file: FiducialFile = serde_json::from_str(&text)?;
                FiducialVector::try_from(file)?
            }
        },
        Value::Object(map) => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Inline {
                two_s: Option<u32>,
                coeffs: Option<Vec<[f64; 2]>>,
                two_m: Option<i32>,
            }
            let inline: Inline = serde_json::from_value(Value::Object(map.clone()))?;
            let own_spin = inline.two_s.map(Spin::new).unwrap_or(spin);
            match (inline.coeffs, inline.two_m) {
                (Some(c), None) => FiducialVector::new(own_spin, c.into_iter().map(complex).collect())?,
                (None, Some(m)) => FiducialVector::basis(own_spin, m)?,
                _ => return Err(invalid("`fv` object needs exactly one of `coeffs` and `two_m`")),
            }
        }
        _ => return Err(invalid("`fv` must be a string or an object")),
    };
    if fv.spin() != spin {
        return Err(invalid(format!("fiducial vector has spin {}, config asks for {spin}", fv.spin())));
    }
    Ok(fv)
}
