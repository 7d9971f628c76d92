//! Seeded batch checks.
//!
//! Samples are drawn sequentially from one generator, evaluated in parallel,
//! and reduced in sample order, so every report depends only on its inputs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::euler::{
    adjoint_action, compose_printed, compose_standard, euler_fit, fit_succeeded, rbar_printed,
    verify_generator_algebra, EulerAngles, FitConfig, GeneratorAlgebraReport,
};
use crate::linalg3::{jacobi_default, orthogonality_residual, scale_of, SymMat3};
use crate::modal::{build_modal_basis, coupling_discriminant, modal_eigenvalues};
use crate::sampling::{random_angles, rng, symmetric_batch};
use crate::spectrum::{eigenvalues_printed, eigenvalues_robust};

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSweep {
    pub samples: usize,
    pub seed: u64,
    pub half_width: f64,
    pub tolerance: f64,
    /// `max |Ω_robust − λ_jacobi| / (1 + ‖Γ‖_F)`.
    pub max_rel_robust_vs_jacobi: f64,
    pub max_rel_printed_vs_jacobi: f64,
    /// Samples whose robust error exceeded `tolerance`.
    pub robust_failures: usize,
    pub max_rel_trace_printed: f64,
    pub max_rel_trace_robust: f64,
    pub max_rel_trace_modal: f64,
    pub max_arccos_excess_robust: f64,
    pub jacobi_errors: usize,
    pub degenerate: usize,
}

impl SpectrumSweep {
    pub fn passed(&self) -> bool {
        self.robust_failures == 0 && self.jacobi_errors == 0
    }

    pub fn traces_hold(&self) -> bool {
        self.max_rel_trace_printed <= self.tolerance
            && self.max_rel_trace_robust <= self.tolerance
            && self.max_rel_trace_modal <= self.tolerance
    }
}

#[derive(Debug, Clone, Copy)]
struct SpectrumRow {
    robust: f64,
    printed: f64,
    tr_printed: f64,
    tr_robust: f64,
    tr_modal: f64,
    excess: f64,
    jacobi_ok: bool,
    degenerate: bool,
}

fn spectrum_row(g: &SymMat3) -> SpectrumRow {
    let s = scale_of(g);
    let tr = g.trace();
    let robust = eigenvalues_robust(g);
    let printed = eigenvalues_printed(g);
    let modal: f64 = modal_eigenvalues(g).iter().sum();
    let (robust_err, printed_err, jacobi_ok) = match jacobi_default(g) {
        Ok(j) => (
            max_of((0..3).map(|i| (robust.omega_sq[i] - j.eigenvalues[i]).abs())),
            max_of((0..3).map(|i| (printed.omega_sq[i] - j.eigenvalues[i]).abs())),
            true,
        ),
        Err(_) => (f64::INFINITY, f64::INFINITY, false),
    };
    SpectrumRow {
        robust: robust_err / s,
        printed: printed_err / s,
        tr_printed: (printed.sum() - tr).abs() / s,
        tr_robust: (robust.sum() - tr).abs() / s,
        tr_modal: (modal - tr).abs() / s,
        excess: robust.arccos_excess,
        jacobi_ok,
        degenerate: robust.degenerate,
    }
}

/// Robust spectrum against Jacobi and the three trace identities.
pub fn spectrum_sweep(samples: usize, seed: u64, half_width: f64, tolerance: f64) -> SpectrumSweep {
    let batch = symmetric_batch(seed, samples, half_width);
    let rows: Vec<SpectrumRow> = batch.par_iter().map(spectrum_row).collect();
    // Not max_of: NaN must surface rather than vanish in f64::max.
    let worst = |f: fn(&SpectrumRow) -> f64| {
        rows.iter()
            .map(f)
            .fold(0.0, |a: f64, b| if b.is_nan() || b > a { b } else { a })
    };
    SpectrumSweep {
        samples,
        seed,
        half_width,
        tolerance,
        max_rel_robust_vs_jacobi: worst(|r| r.robust),
        max_rel_printed_vs_jacobi: worst(|r| r.printed),
        robust_failures: rows.iter().filter(|r| !(r.robust <= tolerance)).count(),
        max_rel_trace_printed: worst(|r| r.tr_printed),
        max_rel_trace_robust: worst(|r| r.tr_robust),
        max_rel_trace_modal: worst(|r| r.tr_modal),
        max_arccos_excess_robust: worst(|r| r.excess),
        jacobi_errors: rows.iter().filter(|r| !r.jacobi_ok).count(),
        degenerate: rows.iter().filter(|r| r.degenerate).count(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitBatch {
    pub samples: usize,
    pub seed: u64,
    pub factor: f64,
    pub successes: usize,
    pub success_rate: f64,
    /// Successes where the oracle-seeded start won.
    pub seeded_wins: usize,
    /// Successes where a random restart won.
    pub retry_wins: usize,
    /// `max off_norm / ‖Γ‖_F` over all samples.
    pub max_rel_off_norm: f64,
    /// Sample indices that failed.
    pub failures: Vec<usize>,
}

/// `euler_fit` over a seeded batch; sample i uses fit seed `seed + i + 1`.
pub fn euler_fit_batch(
    samples: usize,
    seed: u64,
    half_width: f64,
    factor: f64,
    config: &FitConfig,
) -> FitBatch {
    let batch = symmetric_batch(seed, samples, half_width);
    let rows: Vec<(bool, usize, f64)> = batch
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let cfg = FitConfig {
                seed: seed.wrapping_add(i as u64 + 1),
                ..*config
            };
            let fit = euler_fit(g, &cfg);
            let rel = fit.off_norm / g.frobenius().max(f64::MIN_POSITIVE);
            (fit_succeeded(g, &fit, factor), fit.best_start, rel)
        })
        .collect();
    let successes = rows.iter().filter(|r| r.0).count();
    let seeded_wins = rows
        .iter()
        .filter(|r| r.0 && r.1 == 0 && config.oracle_seed)
        .count();
    FitBatch {
        samples,
        seed,
        factor,
        successes,
        success_rate: successes as f64 / samples.max(1) as f64,
        seeded_wins,
        retry_wins: successes - seeded_wins,
        max_rel_off_norm: max_of(rows.iter().map(|r| r.2)),
        failures: rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.0)
            .map(|(i, _)| i)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationAudit {
    pub generator: GeneratorAlgebraReport,
    pub samples: usize,
    pub seed: u64,
    /// Worst `max|AᵀA − I|` and `|det A − 1|` of `adjoint_action`.
    pub adjoint_max_gram: f64,
    pub adjoint_max_det: f64,
    pub standard_max_gram: f64,
    /// Worst `max|adjoint_action − rbar_printed|`.
    pub adjoint_vs_rbar: f64,
    pub probe: EulerAngles,
    pub printed_gram_at_probe: f64,
    pub printed_det_at_probe: f64,
    pub standard_gram_at_probe: f64,
    pub standard_det_at_probe: f64,
}

/// Generator algebra, orthogonality over random angles, and the printed
/// composition at `probe`.
pub fn rotation_audit(samples: usize, seed: u64, probe: EulerAngles) -> RotationAudit {
    let mut r = rng(seed);
    let angles: Vec<EulerAngles> = (0..samples).map(|_| random_angles(&mut r)).collect();
    let rows: Vec<[f64; 4]> = angles
        .par_iter()
        .map(|a| {
            let adj = adjoint_action(a);
            let o = orthogonality_residual(&adj);
            let s = orthogonality_residual(&compose_standard(a));
            [
                o.gram,
                o.det_minus_one.abs(),
                s.gram,
                (adj - rbar_printed(a)).max_abs(),
            ]
        })
        .collect();
    let printed = orthogonality_residual(&compose_printed(&probe));
    let standard = orthogonality_residual(&compose_standard(&probe));
    RotationAudit {
        generator: verify_generator_algebra(),
        samples,
        seed,
        adjoint_max_gram: max_of(rows.iter().map(|r| r[0])),
        adjoint_max_det: max_of(rows.iter().map(|r| r[1])),
        standard_max_gram: max_of(rows.iter().map(|r| r[2])),
        adjoint_vs_rbar: max_of(rows.iter().map(|r| r[3])),
        probe,
        printed_gram_at_probe: printed.gram,
        printed_det_at_probe: printed.det_minus_one.abs(),
        standard_gram_at_probe: standard.gram,
        standard_det_at_probe: standard.det_minus_one.abs(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalSweep {
    pub samples: usize,
    pub seed: u64,
    pub z_floor: f64,
    /// Samples with `z > z_floor`.
    pub eligible: usize,
    /// Eligible samples whose basis could not be built.
    pub build_errors: usize,
    /// Worst pairwise `|vᵢ·vⱼ|` among unit v, v₊, v₋.
    pub max_orthogonality_dev: f64,
}

/// Orthogonality of the modal basis over a seeded batch.
pub fn modal_sweep(samples: usize, seed: u64, half_width: f64, z_floor: f64) -> ModalSweep {
    let batch = symmetric_batch(seed, samples, half_width);
    let rows: Vec<Option<Option<f64>>> = batch
        .par_iter()
        .map(|g| {
            if !(coupling_discriminant(g) > z_floor) {
                return None;
            }
            Some(build_modal_basis(g).ok().map(|b| {
                max_of(
                    [
                        b.v.dot(&b.v_plus),
                        b.v.dot(&b.v_minus),
                        b.v_plus.dot(&b.v_minus),
                    ]
                    .into_iter()
                    .map(f64::abs),
                )
            }))
        })
        .collect();
    ModalSweep {
        samples,
        seed,
        z_floor,
        eligible: rows.iter().filter(|r| r.is_some()).count(),
        build_errors: rows.iter().filter(|r| matches!(r, Some(None))).count(),
        max_orthogonality_dev: max_of(rows.iter().flatten().flatten().copied()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_sweep_small() {
        let s = spectrum_sweep(200, 3, 10.0, 1e-10);
        assert!(s.passed(), "{s:?}");
        assert!(s.traces_hold());
        assert_eq!(s, spectrum_sweep(200, 3, 10.0, 1e-10));
    }

    #[test]
    fn fit_batch_small() {
        let b = euler_fit_batch(20, 1, 10.0, 1e-8, &FitConfig::default());
        assert_eq!(b.successes, 20, "{b:?}");
    }

    #[test]
    fn rotation_audit_small() {
        let r = rotation_audit(100, 5, EulerAngles::new(0.3, 0.4, 0.5));
        assert!(r.adjoint_max_gram <= 1e-12);
        assert!(r.adjoint_vs_rbar <= 1e-14);
        assert!(r.printed_gram_at_probe > 1e-3);
        assert!(r.standard_gram_at_probe <= 1e-14);
    }

    #[test]
    fn modal_sweep_small() {
        let m = modal_sweep(200, 9, 10.0, 1e-6);
        assert_eq!(m.eligible, 200);
        assert_eq!(m.build_errors, 0);
        assert!(m.max_orthogonality_dev <= 1e-12);
    }
}
