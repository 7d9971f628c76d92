//! Modal basis built from the couplings alone:
//!
//! ```text
//! v  = (1, 1, 1)/√3
//! v± = A±·(K₁₂ − K₂₃ ∓ z, K₁₃ − K₁₂ ± z, K₂₃ − K₁₃)
//! λ  = ⅓[tr Γ + 2ΣK],   λ± = ⅓[tr Γ − ΣK] ± z
//! ```
//!
//! `v` is an eigenvector of Γ exactly when Γ has equal row sums, so every
//! result carries residuals instead of assuming that condition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg3::{jacobi_default, scale_of, Mat3, SymMat3, Vec3};
use crate::spectrum::{eigenvalues_printed, eigenvalues_robust};

/// `z = √(K₁₂² + K₁₃² + K₂₃² − (K₁₂K₁₃ + K₁₂K₂₃ + K₁₃K₂₃))`.
///
/// Evaluated as half the sum of squared pairwise differences, which is the
/// same radicand without cancellation.
pub fn coupling_discriminant(g: &SymMat3) -> f64 {
    let [k12, k13, k23] = g.couplings();
    (0.5 * ((k12 - k13).powi(2) + (k12 - k23).powi(2) + (k13 - k23).powi(2))).sqrt()
}

/// Which sign inside `2z ∓ (K₁₃ + K₂₃ − 2K₁₂)` normalizes a vector better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketSign {
    /// `2z − (…)`, as printed.
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalBasis {
    /// Unit length.
    pub v: Vec3,
    pub v_plus: Vec3,
    pub v_minus: Vec3,
    /// Un-normalized `w± = v±/A±`.
    pub w_plus: Vec3,
    pub w_minus: Vec3,
    pub lambda0: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub z: f64,
    /// Printed normalizer `1/√(2z[2z − (K₁₃ + K₂₃ − 2K₁₂)])`, shared by both.
    pub a_plus: f64,
    pub a_minus: f64,
    /// Same with the bracket sign flipped.
    pub a_alt: f64,
    /// `|‖A·w‖ − 1|` for v, v₊, v₋ with the printed normalizer.
    pub norm_residuals: [f64; 3],
    /// Same with [`ModalBasis::a_alt`].
    pub norm_residuals_alt: [f64; 3],
    /// Better-normalizing bracket for v₊ and v₋.
    pub preferred_bracket: [BracketSign; 2],
    /// `‖Γw − λw‖/‖w‖` for (v, λ), (v₊, λ₊), (v₋, λ₋).
    pub eig_residuals: [f64; 3],
    /// max − min of Γ's row sums.
    pub rowsum_spread: f64,
}

impl ModalBasis {
    pub fn eigenvalues(&self) -> [f64; 3] {
        [self.lambda0, self.lambda_plus, self.lambda_minus]
    }
}

/// `1e-12·(1 + ‖Γ‖_F)`.
pub fn degeneracy_threshold(g: &SymMat3) -> f64 {
    1e-12 * scale_of(g)
}

/// `[λ, λ₊, λ₋]`; defined for every input, degenerate or not.
pub fn modal_eigenvalues(g: &SymMat3) -> [f64; 3] {
    let z = coupling_discriminant(g);
    let trace = g.trace();
    let ksum: f64 = g.couplings().iter().sum();
    [
        (trace + 2.0 * ksum) / 3.0,
        (trace - ksum) / 3.0 + z,
        (trace - ksum) / 3.0 - z,
    ]
}

/// Unit v₊, v₋. The shorter raw vector loses digits to cancellation, so it is
/// rebuilt as ±v×(longer) with the sign of the raw vector.
fn unit_pair(v: &Vec3, w_plus: &Vec3, w_minus: &Vec3) -> (Vec3, Vec3) {
    let plus_is_long = w_plus.norm() >= w_minus.norm();
    let (long, short) = if plus_is_long {
        (w_plus, w_minus)
    } else {
        (w_minus, w_plus)
    };
    let long = (*long - v.scale(v.dot(long))).normalized();
    let mut rebuilt = v.cross(&long).normalized();
    if rebuilt.dot(short) < 0.0 {
        rebuilt = -rebuilt;
    }
    if plus_is_long {
        (long, rebuilt)
    } else {
        (rebuilt, long)
    }
}

pub fn build_modal_basis(g: &SymMat3) -> Result<ModalBasis> {
    let z = coupling_discriminant(g);
    let threshold = degeneracy_threshold(g);
    if !(z > threshold) {
        return Err(Error::DegenerateCoupling { z, threshold });
    }
    let [k12, k13, k23] = g.couplings();
    let w_plus = Vec3::new(k12 - k23 - z, k13 - k12 + z, k23 - k13);
    let w_minus = Vec3::new(k12 - k23 + z, k13 - k12 - z, k23 - k13);
    // Both vanish only at z = 0; one may vanish alone (e.g. K₁₃ = K₂₃ ≥ K₁₂).
    let raw_floor = threshold * (1.0 + z);
    for w in [&w_plus, &w_minus] {
        if w.norm() <= raw_floor {
            return Err(Error::DegenerateCoupling {
                z: w.norm(),
                threshold: raw_floor,
            });
        }
    }

    let bracket = k13 + k23 - 2.0 * k12;
    let a_printed = 1.0 / (2.0 * z * (2.0 * z - bracket)).sqrt();
    let a_alt = 1.0 / (2.0 * z * (2.0 * z + bracket)).sqrt();
    let norm_res = |a: f64, w: &Vec3| {
        let r = (a * w.norm() - 1.0).abs();
        if r.is_finite() {
            r
        } else {
            f64::INFINITY
        }
    };

    let v = Vec3::new(1.0, 1.0, 1.0).scale(1.0 / 3f64.sqrt());
    let v_res = (v.norm() - 1.0).abs();
    let norm_residuals = [
        v_res,
        norm_res(a_printed, &w_plus),
        norm_res(a_printed, &w_minus),
    ];
    let norm_residuals_alt = [v_res, norm_res(a_alt, &w_plus), norm_res(a_alt, &w_minus)];
    let pick = |k: usize| {
        if norm_residuals[k] <= norm_residuals_alt[k] {
            BracketSign::Minus
        } else {
            BracketSign::Plus
        }
    };

    let [lambda0, lambda_plus, lambda_minus] = modal_eigenvalues(g);

    let (v_plus, v_minus) = unit_pair(&v, &w_plus, &w_minus);
    let eig_res = |w: &Vec3, lam: f64| (g.mul_vec(w) - w.scale(lam)).norm() / w.norm();
    let sums = g.row_sums();
    let rowsum_spread = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - sums.iter().copied().fold(f64::INFINITY, f64::min);

    Ok(ModalBasis {
        v,
        v_plus,
        v_minus,
        w_plus,
        w_minus,
        lambda0,
        lambda_plus,
        lambda_minus,
        z,
        a_plus: a_printed,
        a_minus: a_printed,
        a_alt,
        norm_residuals,
        norm_residuals_alt,
        preferred_bracket: [pick(1), pick(2)],
        eig_residuals: [
            eig_res(&v, lambda0),
            eig_res(&w_plus, lambda_plus),
            eig_res(&w_minus, lambda_minus),
        ],
        rowsum_spread,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalTransform {
    /// Rows are unit vectors.
    pub u: Mat3,
    /// `‖UUᵀ − I‖_F`.
    pub orthogonality_dev: f64,
    /// Diagonal of `UΓUᵀ`.
    pub diag: [f64; 3],
    /// Off-diagonal Frobenius norm of `UΓUᵀ`.
    pub offdiag_norm: f64,
    /// Row norms of `u` before any use.
    pub row_norms: [f64; 3],
}

impl ModalTransform {
    fn from_rows(g: &SymMat3, u: Mat3) -> Self {
        let d = u * g.to_mat() * u.transpose();
        ModalTransform {
            u,
            orthogonality_dev: (u * u.transpose() - Mat3::IDENTITY).frobenius(),
            diag: d.diagonal(),
            offdiag_norm: d.off_diagonal_norm(),
            row_norms: [u.row(0).norm(), u.row(1).norm(), u.row(2).norm()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalTransformReport {
    pub basis: ModalBasis,
    /// U with unit rows (v, v₊, v₋).
    pub normalized: ModalTransform,
    /// U assembled literally with the printed A±.
    pub printed: ModalTransform,
}

/// Congruence `UΓUᵀ` with `U` rows `v, v₊, v₋`.
pub fn modal_transform(g: &SymMat3) -> Result<ModalTransformReport> {
    let basis = build_modal_basis(g)?;
    let normalized =
        ModalTransform::from_rows(g, Mat3::from_row_vecs(basis.v, basis.v_plus, basis.v_minus));
    let printed = ModalTransform::from_rows(
        g,
        Mat3::from_row_vecs(
            basis.v,
            basis.w_plus.scale(basis.a_plus),
            basis.w_minus.scale(basis.a_minus),
        ),
    );
    Ok(ModalTransformReport {
        basis,
        normalized,
        printed,
    })
}

/// `U = Qᵀ` from the Jacobi eigenvectors; always diagonalizes.
pub fn robust_orthonormal_diagonalizer(g: &SymMat3) -> Result<ModalTransform> {
    let j = jacobi_default(g)?;
    Ok(ModalTransform::from_rows(g, j.eigenvectors.transpose()))
}

/// Multiset distance: max abs difference after sorting both.
pub fn multiset_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let mut a = a;
    let mut b = b;
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueSetComparison {
    pub modal: [f64; 3],
    pub closed_form_printed: [f64; 3],
    pub closed_form_robust: [f64; 3],
    pub jacobi: [f64; 3],
    pub modal_vs_jacobi: f64,
    pub modal_vs_robust: f64,
    pub modal_vs_printed: f64,
    pub printed_vs_jacobi: f64,
    pub rowsum_spread: f64,
}

/// Puts λ, λ± next to the closed-form Ωᵢ² and the Jacobi spectrum.
pub fn compare_eigenvalue_sets(g: &SymMat3) -> Result<EigenvalueSetComparison> {
    let basis = build_modal_basis(g)?;
    let modal = basis.eigenvalues();
    let printed = eigenvalues_printed(g).omega_sq;
    let robust = eigenvalues_robust(g).omega_sq;
    let jacobi = jacobi_default(g)?.eigenvalues;
    Ok(EigenvalueSetComparison {
        modal,
        closed_form_printed: printed,
        closed_form_robust: robust,
        jacobi,
        modal_vs_jacobi: multiset_distance(modal, jacobi),
        modal_vs_robust: multiset_distance(modal, robust),
        modal_vs_printed: multiset_distance(modal, printed),
        printed_vs_jacobi: multiset_distance(printed, jacobi),
        rowsum_spread: basis.rowsum_spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn example() -> SymMat3 {
        SymMat3::new(7.0, 6.0, 5.0, 1.0, 2.0, 3.0)
    }

    #[test]
    fn discriminant_examples() {
        let g = SymMat3::new(0.0, 0.0, 0.0, 1.0, 2.0, 3.0);
        assert_abs_diff_eq!(coupling_discriminant(&g), 3f64.sqrt(), epsilon = 1e-15);
        assert_eq!(
            coupling_discriminant(&SymMat3::new(1.0, 2.0, 3.0, 0.7, 0.7, 0.7)),
            0.0
        );
        assert_eq!(
            coupling_discriminant(&SymMat3::diagonal(1.0, 2.0, 3.0)),
            0.0
        );
    }

    #[test]
    fn equal_couplings_are_degenerate() {
        let err = build_modal_basis(&SymMat3::new(1.0, 2.0, 3.0, 0.4, 0.4, 0.4)).unwrap_err();
        assert!(matches!(err, Error::DegenerateCoupling { .. }));
    }

    #[test]
    fn vanishing_minus_vector_is_degenerate() {
        // K13 = K23 = 1 > K12 = 0 gives w₋ = 0.
        let err = build_modal_basis(&SymMat3::new(1.0, 2.0, 3.0, 0.0, 1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateCoupling { .. }));
    }

    #[test]
    fn short_mode_vector_stays_orthogonal() {
        // K₁₃ ≈ K₂₃ > K₁₂ makes w₋ tiny relative to the couplings.
        let g = SymMat3::new(1.0, 2.0, 3.0, -700.0, 900.0, 900.0 + 1e-4);
        let b = build_modal_basis(&g).unwrap();
        assert!(b.w_minus.norm() < 1e-2 * b.z);
        for (p, q) in [(b.v, b.v_plus), (b.v, b.v_minus), (b.v_plus, b.v_minus)] {
            assert!(p.dot(&q).abs() <= 1e-14);
        }
        assert!(b.v_minus.dot(&b.w_minus.normalized()) > 1.0 - 1e-6);
    }

    #[test]
    fn equal_row_sum_example() {
        let b = build_modal_basis(&example()).unwrap();
        let r3 = 3f64.sqrt();
        assert_abs_diff_eq!(b.lambda0, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.lambda_plus, 4.0 + r3, epsilon = 1e-12);
        assert_abs_diff_eq!(b.lambda_minus, 4.0 - r3, epsilon = 1e-12);
        assert!(
            b.eig_residuals.iter().all(|r| *r <= 1e-10),
            "{:?}",
            b.eig_residuals
        );
        assert_eq!(b.rowsum_spread, 0.0);
        // Printed bracket normalizes v₋ only.
        assert!(b.norm_residuals[2] < 1e-14);
        assert!(b.norm_residuals[1] > 0.1);
        assert!(b.norm_residuals_alt[1] < 1e-14);
        assert_eq!(b.preferred_bracket, [BracketSign::Plus, BracketSign::Minus]);
    }

    #[test]
    fn unequal_row_sums_leave_residual() {
        let g = SymMat3::new(1.0, 2.0, 3.0, 0.1, 0.2, 0.3);
        let b = build_modal_basis(&g).unwrap();
        assert!(b.rowsum_spread > 0.0);
        assert!(b.eig_residuals[0] > 0.1);
    }

    #[test]
    fn basis_orthonormal() {
        let b = build_modal_basis(&SymMat3::new(0.0, 0.0, 0.0, 1.0, 2.0, 3.0)).unwrap();
        assert!(b.v.dot(&b.v_plus).abs() <= 1e-13);
        assert!(b.v.dot(&b.v_minus).abs() <= 1e-13);
        assert!(b.v_plus.dot(&b.v_minus).abs() <= 1e-12);
        assert!(b.w_plus.sum().abs() <= 1e-13 && b.w_minus.sum().abs() <= 1e-13);
    }

    #[test]
    fn transform_on_equal_row_sums() {
        let t = modal_transform(&example()).unwrap();
        let r3 = 3f64.sqrt();
        assert!(t.normalized.offdiag_norm <= 1e-9);
        assert!(t.normalized.orthogonality_dev <= 1e-10);
        for (got, want) in t.normalized.diag.iter().zip([10.0, 4.0 + r3, 4.0 - r3]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-10);
        }
        // The literal U is not orthogonal because A₊ is off.
        assert!(t.printed.orthogonality_dev > 0.1);
    }

    #[test]
    fn transform_on_generic_input_is_not_diagonal() {
        let t = modal_transform(&SymMat3::new(1.0, 2.0, 3.0, 0.1, 0.2, 0.3)).unwrap();
        assert!(t.normalized.offdiag_norm > 1e-3);
    }

    #[test]
    fn robust_diagonalizer() {
        let d = robust_orthonormal_diagonalizer(&SymMat3::diagonal(3.0, 1.0, 2.0)).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(d.u.row(i).0.iter().map(|v| v.abs()).sum::<f64>(), 1.0);
        }
        let g = example();
        let d = robust_orthonormal_diagonalizer(&g).unwrap();
        assert!(d.offdiag_norm <= 1e-12 * scale_of(&g));
        let m = modal_transform(&g).unwrap();
        assert!(multiset_distance(d.diag, m.normalized.diag) < 1e-10);
    }

    #[test]
    fn eigenvalue_sets_on_example() {
        let c = compare_eigenvalue_sets(&example()).unwrap();
        assert!(c.modal_vs_jacobi < 1e-10);
        assert!(c.modal_vs_robust < 1e-10);
        assert!(c.printed_vs_jacobi > 1.0);
    }
}
