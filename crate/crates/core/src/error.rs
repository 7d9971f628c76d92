use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Every failure the library can report.
///
/// The enum is serde-tagged on `kind` so a report can carry it verbatim.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Error {
    #[error("invalid input: {reason}")]
    InvalidInput { reason: String },

    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})"
    )]
    NonConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix is not orthogonal (residual {residual:e})")]
    NotOrthogonal { residual: f64 },

    #[error("modal basis is degenerate (z = {z:e}, threshold {threshold:e})")]
    DegenerateCoupling { z: f64, threshold: f64 },

    #[error("mass of oscillator {oscillator} is {mass:e} at t = {t}")]
    NonPositiveMass {
        oscillator: usize,
        t: f64,
        mass: f64,
    },

    #[error("step {dt:e} does not resolve frequency {max_frequency:e} at t = {t}")]
    StepTooLarge { t: f64, dt: f64, max_frequency: f64 },

    #[error("eigenbasis overlap {overlap:.3} below 0.5 at t = {t}")]
    EigenbasisDiscontinuity { t: f64, overlap: f64 },

    #[error("time {t} outside [{t0}, {t1}]")]
    TimeOutOfRange { t: f64, t0: f64, t1: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            reason: reason.into(),
        }
    }

    /// Stable identifier matching the serialized `kind` tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput { .. } => "invalid_input",
            Error::NonConvergence { .. } => "non_convergence",
            Error::NotOrthogonal { .. } => "not_orthogonal",
            Error::DegenerateCoupling { .. } => "degenerate_coupling",
            Error::NonPositiveMass { .. } => "non_positive_mass",
            Error::StepTooLarge { .. } => "step_too_large",
            Error::EigenbasisDiscontinuity { .. } => "eigenbasis_discontinuity",
            Error::TimeOutOfRange { .. } => "time_out_of_range",
        }
    }

    /// One representative of every variant, for schema round-trip checks.
    pub fn catalogue() -> Vec<Error> {
        vec![
            Error::invalid("example"),
            Error::NonConvergence {
                sweeps: 3,
                off_norm: 1.5e-3,
            },
            Error::NotOrthogonal { residual: 0.25 },
            Error::DegenerateCoupling {
                z: 0.0,
                threshold: 1e-12,
            },
            Error::NonPositiveMass {
                oscillator: 2,
                t: 1.5,
                mass: -0.5,
            },
            Error::StepTooLarge {
                t: 0.0,
                dt: 0.5,
                max_frequency: 3.0,
            },
            Error::EigenbasisDiscontinuity {
                t: 2.25,
                overlap: 0.3,
            },
            Error::TimeOutOfRange {
                t: 11.0,
                t0: 0.0,
                t1: 10.0,
            },
        ]
    }
}
