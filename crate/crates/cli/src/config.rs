use std::path::Path;

use serde::{Deserialize, Serialize};
use triosc::dynamics::{OscillatorSystem, TimeProfile};
use triosc::linalg3::{Mat3, SymMat3, Vec3};
use triosc::EulerAngles;

use crate::UsageError;

/// Parses `"a,b,c;d,e,f;g,h,i"` and requires an exact mirror.
pub fn parse_matrix(text: &str) -> Result<SymMat3, UsageError> {
    let rows: Vec<&str> = text.split(';').collect();
    if rows.len() != 3 {
        return Err(UsageError::new(format!(
            "--matrix needs 3 rows separated by ';', got {}",
            rows.len()
        )));
    }
    let mut m = Mat3::ZERO;
    for (i, row) in rows.iter().enumerate() {
        let entries = parse_list(row, "--matrix row")?;
        if entries.len() != 3 {
            return Err(UsageError::new(format!(
                "--matrix row {} needs 3 entries, got {}",
                i + 1,
                entries.len()
            )));
        }
        m[i] = [entries[0], entries[1], entries[2]];
    }
    SymMat3::from_mat(&m).map_err(|e| UsageError::new(format!("--matrix: {e}")))
}

pub fn parse_angles(text: &str) -> Result<EulerAngles, UsageError> {
    let v = parse_list(text, "--angles")?;
    match v.as_slice() {
        [phi, theta, psi] => Ok(EulerAngles::new(*phi, *theta, *psi)),
        _ => Err(UsageError::new("--angles needs phi,theta,psi")),
    }
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, UsageError> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| UsageError::new(format!("{what}: '{s}' is not a finite number")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Constant,
    Polynomial,
    Exponential,
    Sinusoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub family: Family,
    pub params: Vec<f64>,
}

impl ProfileSpec {
    /// constant `[a]`, polynomial `[c0, c1, …]`, exponential `[a, gamma]`,
    /// sinusoid `[offset, amplitude, omega]` or `[…, phase]`.
    pub fn to_profile(&self) -> Result<TimeProfile, UsageError> {
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(UsageError::new("profile params must be finite"));
        }
        let p = &self.params;
        let bad = |want: &str| {
            Err(UsageError::new(format!(
                "{:?} profile needs params {want}, got {} values",
                self.family,
                p.len()
            )))
        };
        match self.family {
            Family::Constant => match p.as_slice() {
                [a] => Ok(TimeProfile::Constant(*a)),
                _ => bad("[a]"),
            },
            Family::Polynomial if !p.is_empty() => Ok(TimeProfile::Polynomial(p.clone())),
            Family::Polynomial => bad("[c0, c1, ...]"),
            Family::Exponential => match p.as_slice() {
                [a, gamma] => Ok(TimeProfile::Exponential {
                    a: *a,
                    gamma: *gamma,
                }),
                _ => bad("[a, gamma]"),
            },
            Family::Sinusoid => match p.as_slice() {
                [offset, amplitude, omega] | [offset, amplitude, omega, _] => {
                    Ok(TimeProfile::Sinusoid {
                        offset: *offset,
                        amplitude: *amplitude,
                        omega: *omega,
                        phase: p.get(3).copied().unwrap_or(0.0),
                    })
                }
                _ => bad("[offset, amplitude, omega, phase?]"),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSpec {
    pub mass: ProfileSpec,
    pub stiffness: ProfileSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub c12: ProfileSpec,
    pub c13: ProfileSpec,
    pub c23: ProfileSpec,
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(rename = "X")]
    pub x: [f64; 3],
    #[serde(rename = "P")]
    pub p: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub oscillators: [OscillatorSpec; 3],
    pub couplings: CouplingSpec,
    pub simulation: SimulationSpec,
    pub initial: InitialSpec,
}

impl SystemConfig {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError::new(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| UsageError::new(format!("{}: {e}", path.display())))
    }

    /// Profiles only; interval and mass checks happen in [`OscillatorSystem::validate`].
    pub fn profiles(&self) -> Result<OscillatorSystem, UsageError> {
        let mut masses = Vec::with_capacity(3);
        let mut stiffnesses = Vec::with_capacity(3);
        for o in &self.oscillators {
            masses.push(o.mass.to_profile()?);
            stiffnesses.push(o.stiffness.to_profile()?);
        }
        let c = &self.couplings;
        let three =
            |v: Vec<TimeProfile>| -> [TimeProfile; 3] { v.try_into().expect("three oscillators") };
        let s = &self.simulation;
        Ok(OscillatorSystem {
            masses: three(masses),
            stiffnesses: three(stiffnesses),
            couplings: [
                c.c12.to_profile()?,
                c.c13.to_profile()?,
                c.c23.to_profile()?,
            ],
            t0: s.t0,
            t1: s.t1,
            dt: s.dt,
            stride: s.stride,
        })
    }

    pub fn initial_state(&self) -> (Vec3, Vec3) {
        (Vec3(self.initial.x), Vec3(self.initial.p))
    }
}
