//! The nine closed-form coefficients `M_ij` of `R⁻¹ΓR` in Euler angles and
//! their audit against the matrix products `RᵀΓR` and `RΓRᵀ`.
//!
//! Nothing here is corrected: [`mij_printed`] evaluates each formula
//! literally, and [`mij_compare`] measures it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::euler::{compose_standard, euler_fit, EulerAngles, FitConfig};
use crate::linalg3::{jacobi_default, scale_of, Mat3, SymMat3};
use crate::sampling;
use crate::simplex::{self, SimplexOptions};

/// Evaluates the printed `M_11 … M_33`.
///
/// `ϖᵢ²` are the diagonal entries of `g` and `K_ij` its off-diagonals.
pub fn mij_printed(g: &SymMat3, a: &EulerAngles) -> Mat3 {
    let [w1, w2, w3] = g.d;
    let [k12, k13, k23] = g.couplings();
    let (sf, cf) = a.phi.sin_cos();
    let (st, ct) = a.theta.sin_cos();
    let (sp, cp) = a.psi.sin_cos();
    let c2f = (2.0 * a.phi).cos();
    let c2t = (2.0 * a.theta).cos();
    let c2p = (2.0 * a.psi).cos();
    let sq = |x: f64| x * x;

    let m11 = sq(ct) * sq(cp) * w1
        + sq(cf * sp + st * sf * cp) * w2
        + sq(sp * sf - cp * cf * st) * w3
        + 2.0 * ct * cp * ((cf * sp + st * sf * cp) * k12 + (sp * sf - cp * cf * st) * k13)
        + 2.0 * (cf * sf * (sq(sp) - sq(cp) * sq(st)) - st * sf * cp * c2f) * k23;

    let m12 = -sq(ct) * cp * sp * w1
        + (sp * cp * (sq(cf) - sq(st) * sq(sf)) + cf * sf * st * c2p) * w2
        + (cp * sp * (sq(sf) - sq(st) * sq(cf)) - cf * sf * st * c2p) * w3
        + ct * (cf * c2p - 2.0 * cp * sf * sp * st) * k12
        + ct * (sf * c2p + 2.0 * cp * cf * st * sp) * k13
        + (2.0 * (sq(st) + 1.0) * cp * cf * sp * sf - st * c2f * c2p) * k23;

    let m13 = st * ct * cp * w1 - sf * ct * (cf * sp + st * sf * cp) * w2
        + cf * ct * (sp * sf - cp * cf * st) * w3
        + (cf * sp * st - sf * cp * c2t) * k12
        + (sf * sp * st + cf * cp * c2t) * k13
        + (2.0 * st * sf * cp * cf * ct + sp * ct * c2f) * k23;

    let m21 = -sq(ct) * sp * cp * w1
        + (cf * sf * st * c2p + sp * cp * (sq(cf) - sq(sf) * sq(st))) * w2
        + (-cf * sf * st * c2p + sp * cp * (sq(sf) - sq(cf) * sq(st))) * w3
        + ct * (cf * c2p - 2.0 * cp * sf * sp * st) * k12
        + ct * (sf * c2p + 2.0 * cp * st * cf * sp) * k13
        + (st * (sq(sp) * c2f - sq(cp) * c2f) + 2.0 * (1.0 + sq(st)) * cp * sp * cf * sf) * k23;

    let m22 =
        sq(ct) * sq(sp) * w1 + sq(cf * cp - sf * sp * st) * w2 + sq(cp * sf + st * cf * sp) * w3
            - 2.0 * ct * sp * (cf * cp - sf * sp * st) * k12
            - 2.0 * ct * sp * (cp * sf + st * cf * sp) * k13
            + 2.0 * (sf * cf * (sq(cp) - sq(sp) * sq(st)) + st * cp * sp * c2f) * k23;

    let m23 = -st * ct * sp * w1
        + sf * ct * (sf * sp * st - cf * cp) * w2
        + cf * ct * (cp * sf + st * cf * sp) * w3
        + (cf * cp * st + sp * sf * c2t) * k12
        + (cp * sf * st - sp * cf * c2t) * k13
        + ct * (cp * c2f - 2.0 * sf * st * cf * sp) * k23;

    let m31 = ct * st * cp * w1 - ct * sf * (sf * st * cp + cf * sp) * w2
        + ct * cf * (sp * sf - cf * st * cp) * w3
        + (st * cf * sp - sf * cp * c2t) * k12
        + (cp * cf * c2t + st * sp * sf) * k13
        + ct * (2.0 * cf * sf * st * cp + sp * c2f) * k23;

    let m32 = -ct * st * sp * w1 - ct * sf * (cf * cp - sf * sp * st) * w2
        + cf * ct * (sf * cp + sp * cf * st) * w3
        + (sf * sp * c2t + st * cf * cp) * k12
        + (-cf * sp * c2t + st * sf * cp) * k13
        + ct * (cp * c2f - 2.0 * cf * sf * sp * st) * k23;

    let m33 = sq(st) * w1 + sq(ct) * sq(sf) * w2 + sq(cf) * sq(ct) * w3
        - 2.0 * ct * (st * sf * k12 - st * cf * k13 + ct * cf * sf * k23);

    Mat3([[m11, m12, m13], [m21, m22, m23], [m31, m32, m33]])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MijReport {
    pub printed: Mat3,
    pub product_rt_g_r: Mat3,
    pub product_r_g_rt: Mat3,
    pub dev_rt_g_r: Mat3,
    pub dev_r_g_rt: Mat3,
    /// Entry-wise `min(dev_rt_g_r, dev_r_g_rt)`.
    pub per_entry_dev: Mat3,
    /// `max |printed[i][j] − printed[j][i]|`.
    pub symmetry_dev: f64,
    /// Confirmation threshold `1e-12·(1 + ‖Γ‖_F)` used for `confirmed`.
    pub threshold: f64,
    pub confirmed: [[bool; 3]; 3],
}

pub const CONFIRM_FACTOR: f64 = 1e-12;

pub fn mij_compare(g: &SymMat3, a: &EulerAngles) -> MijReport {
    mij_compare_with(g, a, CONFIRM_FACTOR)
}

pub fn mij_compare_with(g: &SymMat3, a: &EulerAngles, factor: f64) -> MijReport {
    let r = compose_standard(a);
    let gm = g.to_mat();
    let printed = mij_printed(g, a);
    let product_rt_g_r = r.transpose() * gm * r;
    let product_r_g_rt = r * gm * r.transpose();
    let dev_rt_g_r = printed.map2(&product_rt_g_r, |x, y| (x - y).abs());
    let dev_r_g_rt = printed.map2(&product_r_g_rt, |x, y| (x - y).abs());
    let per_entry_dev = dev_rt_g_r.map2(&dev_r_g_rt, f64::min);
    let threshold = factor * scale_of(g);
    let confirmed = per_entry_dev.0.map(|row| row.map(|d| d <= threshold));
    MijReport {
        printed,
        product_rt_g_r,
        product_r_g_rt,
        dev_rt_g_r,
        dev_r_g_rt,
        per_entry_dev,
        symmetry_dev: printed.asymmetry(),
        threshold,
        confirmed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Confirmed,
    Deviating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductMatch {
    RtGR,
    RGRt,
    Both,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryVerdict {
    pub status: EntryStatus,
    pub matches: ProductMatch,
    /// Over samples, `max dev / (1 + ‖Γ‖_F)` for each product.
    pub max_rel_dev_rt_g_r: f64,
    pub max_rel_dev_r_g_rt: f64,
    /// Over samples, `max min(dev) / (1 + ‖Γ‖_F)`.
    pub max_rel_dev: f64,
    /// Largest absolute deviation of the best product seen.
    pub max_abs_dev: f64,
    pub confirmed_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MijAudit {
    pub samples: usize,
    pub seed: u64,
    pub factor: f64,
    pub table: [[EntryVerdict; 3]; 3],
    pub max_symmetry_dev: f64,
    pub max_rel_symmetry_dev: f64,
}

/// Batch audit over `samples` seeded draws (entries in `[−10, 10]`, angles
/// in `[−π, π]`).
pub fn mij_audit(samples: usize, seed: u64, factor: f64) -> MijAudit {
    let mut rng = sampling::rng(seed);
    let draws: Vec<(SymMat3, EulerAngles)> = (0..samples)
        .map(|_| {
            let g = sampling::random_symmetric(&mut rng, 10.0);
            (g, sampling::random_angles(&mut rng))
        })
        .collect();
    let reports: Vec<(f64, MijReport)> = draws
        .par_iter()
        .map(|(g, a)| (scale_of(g), mij_compare_with(g, a, factor)))
        .collect();

    let mut table = [[EntryVerdict {
        status: EntryStatus::Confirmed,
        matches: ProductMatch::Neither,
        max_rel_dev_rt_g_r: 0.0,
        max_rel_dev_r_g_rt: 0.0,
        max_rel_dev: 0.0,
        max_abs_dev: 0.0,
        confirmed_samples: 0,
    }; 3]; 3];
    let mut max_symmetry_dev: f64 = 0.0;
    let mut max_rel_symmetry_dev: f64 = 0.0;

    for (scale, rep) in &reports {
        max_symmetry_dev = max_symmetry_dev.max(rep.symmetry_dev);
        max_rel_symmetry_dev = max_rel_symmetry_dev.max(rep.symmetry_dev / scale);
        for i in 0..3 {
            for j in 0..3 {
                let v = &mut table[i][j];
                v.max_rel_dev_rt_g_r = v.max_rel_dev_rt_g_r.max(rep.dev_rt_g_r[i][j] / scale);
                v.max_rel_dev_r_g_rt = v.max_rel_dev_r_g_rt.max(rep.dev_r_g_rt[i][j] / scale);
                v.max_rel_dev = v.max_rel_dev.max(rep.per_entry_dev[i][j] / scale);
                v.max_abs_dev = v.max_abs_dev.max(rep.per_entry_dev[i][j]);
                if rep.confirmed[i][j] {
                    v.confirmed_samples += 1;
                }
            }
        }
    }
    for row in table.iter_mut() {
        for v in row.iter_mut() {
            v.status = if v.confirmed_samples == samples {
                EntryStatus::Confirmed
            } else {
                EntryStatus::Deviating
            };
            v.matches = match (
                v.max_rel_dev_rt_g_r <= factor,
                v.max_rel_dev_r_g_rt <= factor,
            ) {
                (true, true) => ProductMatch::Both,
                (true, false) => ProductMatch::RtGR,
                (false, true) => ProductMatch::RGRt,
                (false, false) => ProductMatch::Neither,
            };
        }
    }
    MijAudit {
        samples,
        seed,
        factor,
        table,
        max_symmetry_dev,
        max_rel_symmetry_dev,
    }
}

/// `Σ_{i≠j} M_ij²` of the printed coefficients.
pub fn printed_off_objective(g: &SymMat3, a: &EulerAngles) -> f64 {
    let m = mij_printed(g, a);
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                s += m[i][j] * m[i][j];
            }
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroConstraintProbe {
    /// Smallest `Σ_{i≠j} M_ij²` found with the printed formulas.
    pub printed_minimum: f64,
    pub angles: EulerAngles,
    pub starts_used: usize,
    /// `√(printed_minimum / 2)`, comparable to an upper-triangle norm.
    pub printed_off_norm: f64,
    /// Off-norm of the true product achieved by [`euler_fit`].
    pub euler_fit_off_norm: f64,
    pub has_coupling: bool,
}

/// Minimizes the printed off-diagonal coefficients over angles, under the
/// same multi-start simplex settings as [`euler_fit`].
pub fn mij_zero_constraint_probe(g: &SymMat3, config: &FitConfig) -> ZeroConstraintProbe {
    let scale_sq = 1.0 + g.frobenius().powi(2);
    let opts = SimplexOptions {
        initial_step: config.initial_step,
        max_iterations: config.max_iterations,
        x_tol: 1e-12,
        f_tol: 1e-24 * scale_sq,
    };
    let objective = |x: &[f64; 3]| printed_off_objective(g, &EulerAngles::from_array(*x));

    let mut starts = vec![[0.0; 3]];
    if config.oracle_seed {
        if let Some(e) = jacobi_default(g)
            .ok()
            .and_then(|j| crate::euler::extract_angles(&j.eigenvectors).ok())
        {
            starts.push(e.angles.to_array());
        }
    }
    let mut rng = sampling::rng(config.seed);
    for _ in 0..config.random_starts {
        starts.push(sampling::random_angles(&mut rng).to_array());
    }

    let mut best: Option<simplex::SimplexResult> = None;
    for s in &starts {
        let r = simplex::minimize(objective, *s, &opts);
        if best.as_ref().is_none_or(|b| r.fx < b.fx) {
            best = Some(r);
        }
    }
    let best = best.expect("zero start always present");
    let fit = euler_fit(g, config);
    let [k12, k13, k23] = g.couplings();
    ZeroConstraintProbe {
        printed_minimum: best.fx,
        angles: EulerAngles::from_array(best.x),
        starts_used: starts.len(),
        printed_off_norm: (best.fx / 2.0).sqrt(),
        euler_fit_off_norm: fit.off_norm,
        has_coupling: k12 != 0.0 || k13 != 0.0 || k23 != 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn coupled() -> SymMat3 {
        SymMat3::new(1.0, 2.0, 3.0, 0.5, 0.5, 0.5)
    }

    #[test]
    fn zero_angles_reproduce_gamma() {
        for g in [coupled(), SymMat3::new(7.0, 6.0, 5.0, 1.0, 2.0, 3.0)] {
            assert_eq!(mij_printed(&g, &EulerAngles::ZERO), g.to_mat());
        }
        let k0 = SymMat3::diagonal(1.5, -2.0, 4.0);
        assert_eq!(mij_printed(&k0, &EulerAngles::ZERO), k0.to_mat());
    }

    #[test]
    fn m33_at_quarter_turn() {
        let g = coupled();
        for psi in [0.0, 0.4, 2.0] {
            let m = mij_printed(&g, &EulerAngles::new(0.0, FRAC_PI_2, psi));
            assert_abs_diff_eq!(m[2][2], 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn diagonal_input_confirms_everything_at_zero_angles() {
        let r = mij_compare(&SymMat3::diagonal(1.0, 2.0, 3.0), &EulerAngles::ZERO);
        assert_eq!(r.per_entry_dev, Mat3::ZERO);
        assert!(r.confirmed.iter().flatten().all(|c| *c));
    }

    #[test]
    fn only_m11_deviates_at_sample_point() {
        let r = mij_compare(&coupled(), &EulerAngles::new(0.3, 0.4, 0.5));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(r.confirmed[i][j], (i, j) != (0, 0), "entry ({i},{j})");
                assert!(r.dev_rt_g_r[i][j] <= r.dev_r_g_rt[i][j] || (i, j) == (0, 0));
            }
        }
        assert!(r.symmetry_dev < 1e-12);
    }

    #[test]
    fn m11_deviation_is_the_k23_term() {
        // With only K23 nonzero the deviation isolates that coefficient.
        let g = SymMat3::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let a = EulerAngles::new(0.3, 0.4, 0.5);
        let r = mij_compare(&g, &a);
        let (sf, st, sp, cp) = (a.phi.sin(), a.theta.sin(), a.psi.sin(), a.psi.cos());
        let c2f = (2.0 * a.phi).cos();
        let predicted = 2.0 * st * c2f * cp * (sp - sf);
        assert_abs_diff_eq!(
            r.printed[0][0] - r.product_rt_g_r[0][0],
            predicted,
            epsilon = 1e-14
        );
    }

    #[test]
    fn audit_is_deterministic_and_flags_m11() {
        let a = mij_audit(500, 42, CONFIRM_FACTOR);
        assert_eq!(a, mij_audit(500, 42, CONFIRM_FACTOR));
        assert_eq!(a.table[0][0].status, EntryStatus::Deviating);
        assert_eq!(a.table[2][2].status, EntryStatus::Confirmed);
        assert_eq!(a.table[2][2].matches, ProductMatch::RtGR);
    }

    #[test]
    fn probe_on_diagonal_is_zero() {
        let p = mij_zero_constraint_probe(&SymMat3::diagonal(1.0, 2.0, 3.0), &FitConfig::default());
        assert_eq!(p.printed_minimum, 0.0);
        assert!(!p.has_coupling);
    }

    #[test]
    fn probe_on_coupled_inputs_runs() {
        let g = SymMat3::new(7.0, 6.0, 5.0, 1.0, 2.0, 3.0);
        let p = mij_zero_constraint_probe(&g, &FitConfig::default());
        assert!(p.printed_minimum.is_finite());
        assert!(p.euler_fit_off_norm <= 1e-8 * g.frobenius());
    }
}
