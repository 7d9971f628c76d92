//! Closed-form trigonometric eigenvalues of Γ.
//!
//! Two evaluations share the same shape
//! `Ωᵢ² = ⅓[tr Γ + 2·A·cos((Φ + 2πk)/3)]`, `Φ = arccos(Δ / 2√Ω³)`:
//!
//! * [`SpectrumMode::AsPrinted`] takes `A = Ω` and the discriminant `Δ`
//!   exactly as typeset, including the `2(ϖ₁³ + ϖ₂³ + ϖ₃³)` term.
//! * [`SpectrumMode::Robust`] takes `A = √Ω` and `Δ = 27·det(Γ − tr Γ/3·I)`,
//!   which is the correct trigonometric solution of the characteristic cubic.
//!
//! `Ω` is the same in both modes:
//! `½Σ(ϖᵢ² − ϖⱼ²)² + 3(K₁₂² + K₁₃² + K₂₃²)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::linalg3::{jacobi_default, SymMat3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMode {
    AsPrinted,
    Robust,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Ω₁², Ω₂², Ω₃² sorted ascending.
    pub omega_sq: [f64; 3],
    pub big_omega: f64,
    pub delta: f64,
    pub phi_angle: f64,
    pub mode: SpectrumMode,
    /// arccos argument was outside [−1, 1] and got clamped.
    pub clamped: bool,
    /// `max(|Δ/2√Ω³| − 1, 0)` before clamping.
    pub arccos_excess: f64,
    /// Ω fell below `1e-13·(1 + ‖Γ‖_F²)`; eigenvalues are all tr Γ / 3.
    pub degenerate: bool,
}

impl Spectrum {
    pub fn sum(&self) -> f64 {
        self.omega_sq.iter().sum()
    }
}

/// Ω of the closed form: half the squared pairwise diagonal gaps plus three
/// times the squared couplings.
pub fn big_omega(g: &SymMat3) -> f64 {
    let [w1, w2, w3] = g.d;
    let [k12, k13, k23] = g.couplings();
    0.5 * ((w1 - w2).powi(2) + (w1 - w3).powi(2) + (w2 - w3).powi(2))
        + 3.0 * (k23 * k23 + k13 * k13 + k12 * k12)
}

/// ϖ³ from ϖ²; negative squares map to `−|ϖ²|^{3/2}`.
fn cube_of_root(w_sq: f64) -> f64 {
    w_sq.signum() * w_sq.abs().powf(1.5)
}

/// Δ term for term as printed.
pub fn delta_printed(g: &SymMat3) -> f64 {
    let [w1, w2, w3] = g.d;
    let [k12, k13, k23] = g.couplings();
    let ksq = k23 * k23 + k13 * k13 + k12 * k12;
    18.0 * (w1 * w2 * w3 + 3.0 * k12 * k13 * k23)
        + 2.0 * (cube_of_root(w1) + cube_of_root(w3) + cube_of_root(w2))
        + 9.0 * (w1 + w2 + w3) * ksq
        - 3.0 * (w1 + w2) * (w1 + w3) * (w2 + w3)
        - 27.0 * (w1 * k23 * k23 + w2 * k13 * k13 + w3 * k12 * k12)
}

/// `27·det(Γ − q·I)` with `q = tr Γ / 3`.
pub fn delta_robust(g: &SymMat3) -> f64 {
    27.0 * g.shifted(g.trace() / 3.0).det()
}

pub fn eigenvalues_printed(g: &SymMat3) -> Spectrum {
    let omega = big_omega(g);
    evaluate(g, omega, delta_printed(g), omega, SpectrumMode::AsPrinted)
}

pub fn eigenvalues_robust(g: &SymMat3) -> Spectrum {
    let omega = big_omega(g);
    evaluate(
        g,
        omega,
        delta_robust(g),
        omega.sqrt(),
        SpectrumMode::Robust,
    )
}

pub fn eigenvalues(g: &SymMat3, mode: SpectrumMode) -> Spectrum {
    match mode {
        SpectrumMode::AsPrinted => eigenvalues_printed(g),
        SpectrumMode::Robust => eigenvalues_robust(g),
    }
}

fn evaluate(g: &SymMat3, omega: f64, delta: f64, amplitude: f64, mode: SpectrumMode) -> Spectrum {
    let trace = g.trace();
    let fro = g.frobenius();
    if omega < 1e-13 * (1.0 + fro * fro) {
        return Spectrum {
            omega_sq: [trace / 3.0; 3],
            big_omega: omega,
            delta,
            phi_angle: 0.0,
            mode,
            clamped: false,
            arccos_excess: 0.0,
            degenerate: true,
        };
    }

    let arg = delta / (2.0 * (omega * omega * omega).sqrt());
    let excess = (arg.abs() - 1.0).max(0.0);
    let clamped = excess > 0.0 || arg.is_nan();
    let phi = arg.clamp(-1.0, 1.0).acos();

    let mut omega_sq = [0.0, 2.0 * PI, -2.0 * PI]
        .map(|shift| (trace + 2.0 * amplitude * ((phi + shift) / 3.0).cos()) / 3.0);
    // No ordering is implied by the three branches.
    omega_sq.sort_by(f64::total_cmp);

    Spectrum {
        omega_sq,
        big_omega: omega,
        delta,
        phi_angle: phi,
        mode,
        clamped,
        arccos_excess: excess,
        degenerate: false,
    }
}

/// Three-way comparison of printed, robust and Jacobi eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub printed: Spectrum,
    pub robust: Spectrum,
    pub jacobi: [f64; 3],
    pub printed_vs_jacobi: [f64; 3],
    pub robust_vs_jacobi: [f64; 3],
    pub printed_vs_robust: [f64; 3],
    pub delta_printed: f64,
    pub delta_robust: f64,
    pub delta_difference: f64,
}

pub fn compare_modes(g: &SymMat3) -> crate::Result<ModeComparison> {
    let printed = eigenvalues_printed(g);
    let robust = eigenvalues_robust(g);
    let jacobi = jacobi_default(g)?.eigenvalues;

    let diff = |a: &[f64; 3], b: &[f64; 3]| [0, 1, 2].map(|i| (a[i] - b[i]).abs());
    Ok(ModeComparison {
        printed_vs_jacobi: diff(&printed.omega_sq, &jacobi),
        robust_vs_jacobi: diff(&robust.omega_sq, &jacobi),
        printed_vs_robust: diff(&printed.omega_sq, &robust.omega_sq),
        delta_printed: printed.delta,
        delta_robust: robust.delta,
        delta_difference: printed.delta - robust.delta,
        printed,
        robust,
        jacobi,
    })
}
