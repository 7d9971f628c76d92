//! Euler-angle rotations `R = R_X1(φ)·R_X2(θ)·R_X3(ψ)`, the literal
//! closed-form matrices, the so(3) generator algebra, the adjoint action of
//! the rotation operator on coordinates, and the off-diagonal minimizing
//! Euler fit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg3::{axis_rotation, jacobi_default, orthogonality_residual, Axis, Mat3, SymMat3};
use crate::sampling;
use crate::simplex::{self, SimplexOptions};

/// (φ, θ, ψ) in radians. No range restriction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    pub const ZERO: EulerAngles = EulerAngles::new(0.0, 0.0, 0.0);

    pub const fn new(phi: f64, theta: f64, psi: f64) -> Self {
        EulerAngles { phi, theta, psi }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.phi, self.theta, self.psi]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        EulerAngles::new(a[0], a[1], a[2])
    }

    pub fn negated(self) -> Self {
        EulerAngles::new(-self.phi, -self.theta, -self.psi)
    }
}

struct Trig {
    cf: f64,
    sf: f64,
    ct: f64,
    st: f64,
    cp: f64,
    sp: f64,
}

impl Trig {
    fn of(a: &EulerAngles) -> Self {
        let (sf, cf) = a.phi.sin_cos();
        let (st, ct) = a.theta.sin_cos();
        let (sp, cp) = a.psi.sin_cos();
        Trig {
            cf,
            sf,
            ct,
            st,
            cp,
            sp,
        }
    }
}

/// Product of the three axis rotations.
pub fn compose_standard(a: &EulerAngles) -> Mat3 {
    axis_rotation(Axis::X1, a.phi)
        * axis_rotation(Axis::X2, a.theta)
        * axis_rotation(Axis::X3, a.psi)
}

/// The expanded rotation matrix entry by entry as typeset.
///
/// Entry (3,1) reads `−cos θ sin θ cos ψ + sin ψ sin φ`; the product of the
/// factors gives `−cos φ sin θ cos ψ + sin φ sin ψ` there.
pub fn compose_printed(a: &EulerAngles) -> Mat3 {
    let Trig {
        cf,
        sf,
        ct,
        st,
        cp,
        sp,
    } = Trig::of(a);
    Mat3([
        [ct * cp, -ct * sp, st],
        [sf * st * cp + cf * sp, cf * cp - sf * sp * st, -sf * ct],
        [-ct * st * cp + sp * sf, sf * cp + sp * cf * st, cf * ct],
    ])
}

/// The printed adjoint-action matrix R̄, entry by entry.
pub fn rbar_printed(a: &EulerAngles) -> Mat3 {
    let Trig {
        cf,
        sf,
        ct,
        st,
        cp,
        sp,
    } = Trig::of(a);
    Mat3([
        [ct * cp, ct * sp, -st],
        [sf * st * cp - sp * cf, sf * st * sp + cp * cf, sf * ct],
        [st * cf * cp + sf * sp, st * cf * sp - sf * cp, cf * ct],
    ])
}

pub type CMat3 = [[Complex64; 3]; 3];

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Defining-representation generator `(J_k)_{mn} = −i·ε_{kmn}`.
pub fn generator(k: usize) -> CMat3 {
    let mut j = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (m, row) in j.iter_mut().enumerate() {
        for (n, z) in row.iter_mut().enumerate() {
            *z = Complex64::new(0.0, -levi_civita(k, m, n));
        }
    }
    j
}

fn cmul(a: &CMat3, b: &CMat3) -> CMat3 {
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn cfrobenius_diff(a: &CMat3, b: &CMat3) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorAlgebraReport {
    /// `max_{i,j} ‖[J_i, J_j] − i·ε_ijk·J_k‖_F`.
    pub commutator_residual: f64,
    /// `‖[J_1, J_2] − i·J_3‖_F`.
    pub spot_check_residual: f64,
    /// `max_k ‖J_k − J_k†‖_F`.
    pub hermiticity_residual: f64,
}

/// Checks `[J_i, J_j] = i·ε_ijk·J_k` (ħ = 1) in the defining representation.
pub fn verify_generator_algebra() -> GeneratorAlgebraReport {
    let js = [generator(0), generator(1), generator(2)];
    let i_unit = Complex64::new(0.0, 1.0);
    let mut commutator_residual: f64 = 0.0;
    let mut spot_check_residual = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let ab = cmul(&js[i], &js[j]);
            let ba = cmul(&js[j], &js[i]);
            let mut comm = ab;
            let mut rhs = [[Complex64::new(0.0, 0.0); 3]; 3];
            for m in 0..3 {
                for n in 0..3 {
                    comm[m][n] = ab[m][n] - ba[m][n];
                    rhs[m][n] = (0..3)
                        .map(|k| i_unit * levi_civita(i, j, k) * js[k][m][n])
                        .sum();
                }
            }
            let r = cfrobenius_diff(&comm, &rhs);
            commutator_residual = commutator_residual.max(r);
            if (i, j) == (0, 1) {
                spot_check_residual = r;
            }
        }
    }
    let hermiticity_residual = js
        .iter()
        .map(|j| {
            let mut dagger = *j;
            for m in 0..3 {
                for n in 0..3 {
                    dagger[m][n] = j[n][m].conj();
                }
            }
            cfrobenius_diff(j, &dagger)
        })
        .fold(0.0, f64::max);
    GeneratorAlgebraReport {
        commutator_residual,
        spot_check_residual,
        hermiticity_residual,
    }
}

/// Convention used by [`adjoint_action`].
pub const ADJOINT_CONVENTION: &str = "Lambda = exp(i*phi*J1) exp(i*theta*J2) exp(i*psi*J3), \
(J_k)_mn = -i*eps_kmn, hbar = 1, [J_i, X_j] = i*eps_ijk*X_k; \
Lambda^-1 X_i Lambda = sum_k B_ik X_k with B = exp(i*phi*J1) exp(i*theta*J2) exp(i*psi*J3) \
evaluated in the defining representation (= R_X1(-phi) R_X2(-theta) R_X3(-psi))";

/// `exp(α·G)` for a real generator `G = i·J_k`, which satisfies `G³ = −G`.
fn generator_exp(k: usize, alpha: f64) -> Mat3 {
    let j = generator(k);
    let mut g = Mat3::ZERO;
    for m in 0..3 {
        for n in 0..3 {
            // i·(−i·ε) is real.
            g[m][n] = (Complex64::new(0.0, 1.0) * j[m][n]).re;
        }
    }
    let (s, c) = alpha.sin_cos();
    Mat3::IDENTITY + g.scale(s) + (g * g).scale(1.0 - c)
}

/// Matrix `B` with `Λ⁻¹ X_i Λ = Σ_k B_ik X_k`; see [`ADJOINT_CONVENTION`].
///
/// Each factor `Λ_k⁻¹ X Λ_k` solves `dX_j/dα = ε_kjl X_l`, whose flow is
/// `exp(α·i·J_k)`; conjugating by the product composes the factors in order.
pub fn adjoint_action(a: &EulerAngles) -> Mat3 {
    generator_exp(0, a.phi) * generator_exp(1, a.theta) * generator_exp(2, a.psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub angles: EulerAngles,
    /// A column sign was flipped to turn det −1 into +1.
    pub det_flipped: bool,
    pub gimbal_lock: bool,
    /// `‖compose_standard(angles) − q‖_F` after any flip.
    pub residual: f64,
}

const GIMBAL_COS: f64 = 1e-9;

/// Inverse of [`compose_standard`] with `θ = arcsin q[0][2]`.
pub fn extract_angles(q: &Mat3) -> Result<Extraction> {
    let orth = orthogonality_residual(q);
    if !(orth.gram <= 1e-8) {
        return Err(Error::NotOrthogonal {
            residual: orth.gram,
        });
    }
    let mut q = *q;
    let det_flipped = q.det() < 0.0;
    if det_flipped {
        for r in 0..3 {
            q[r][2] = -q[r][2];
        }
    }

    let theta = q[0][2].clamp(-1.0, 1.0).asin();
    let gimbal_lock = theta.cos().abs() < GIMBAL_COS;
    let (phi, psi) = if gimbal_lock {
        // ψ = 0 leaves R_X1(φ)·R_X2(θ), whose (2,2), (3,2) entries are cos φ, sin φ.
        (q[2][1].atan2(q[1][1]), 0.0)
    } else {
        ((-q[1][2]).atan2(q[2][2]), (-q[0][1]).atan2(q[0][0]))
    };
    let angles = EulerAngles::new(phi, theta, psi);
    let residual = (compose_standard(&angles) - q).frobenius();
    Ok(Extraction {
        angles,
        det_flipped,
        gimbal_lock,
        residual,
    })
}

/// `Σ_{i<j} (RᵀgR)²_ij` with `R = compose_standard(a)`.
pub fn off_diagonal_objective(g: &SymMat3, a: &EulerAngles) -> f64 {
    let m = g.conjugate_by(&compose_standard(a));
    m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub random_starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub initial_step: f64,
    /// Skip the Jacobi-seeded start (pure random multi-start).
    pub oracle_seed: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            random_starts: 8,
            seed: 0,
            max_iterations: 2000,
            initial_step: 0.1,
            oracle_seed: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub angles: EulerAngles,
    /// `√Σ_{i<j}(RᵀΓR)²_ij`.
    pub off_norm: f64,
    pub diagonal: [f64; 3],
    pub iterations: usize,
    pub starts_used: usize,
    /// Index of the winning start; 0 is the oracle seed when enabled.
    pub best_start: usize,
    /// Objective at the oracle-seeded start, if it was used.
    pub seeded_objective: Option<f64>,
}

/// Minimizes the off-diagonal mass of `RᵀgR` over Euler angles.
///
/// Starts are independent and merged by smallest objective, ties to the
/// lowest start index.
pub fn euler_fit(g: &SymMat3, config: &FitConfig) -> FitResult {
    let scale_sq = 1.0 + g.frobenius().powi(2);
    let opts = SimplexOptions {
        initial_step: config.initial_step,
        max_iterations: config.max_iterations,
        x_tol: 1e-12,
        f_tol: 1e-24 * scale_sq,
    };
    let objective = |x: &[f64; 3]| off_diagonal_objective(g, &EulerAngles::from_array(*x));

    let mut starts: Vec<[f64; 3]> = Vec::with_capacity(config.random_starts + 1);
    let mut seeded_objective = None;
    if config.oracle_seed {
        let seed = jacobi_default(g)
            .ok()
            .and_then(|j| extract_angles(&j.eigenvectors).ok())
            .map(|e| e.angles.to_array());
        if let Some(s) = seed {
            seeded_objective = Some(objective(&s));
            starts.push(s);
        }
    }
    let mut rng = sampling::rng(config.seed);
    for _ in 0..config.random_starts {
        starts.push(sampling::random_angles(&mut rng).to_array());
    }
    if starts.is_empty() {
        starts.push([0.0; 3]);
    }

    let mut best: Option<(usize, simplex::SimplexResult)> = None;
    for (i, s) in starts.iter().enumerate() {
        let r = simplex::minimize(objective, *s, &opts);
        if best.as_ref().is_none_or(|(_, b)| r.fx < b.fx) {
            best = Some((i, r));
        }
    }
    let (best_start, r) = best.expect("at least one start");
    let angles = EulerAngles::from_array(r.x);
    let diagonal = g.conjugate_by(&compose_standard(&angles)).diagonal();
    FitResult {
        angles,
        off_norm: r.fx.sqrt(),
        diagonal,
        iterations: r.iterations,
        starts_used: starts.len(),
        best_start,
        seeded_objective,
    }
}

/// Off-norm threshold `factor·‖g‖_F` used to call a fit successful.
pub fn fit_succeeded(g: &SymMat3, fit: &FitResult, factor: f64) -> bool {
    fit.off_norm <= factor * g.frobenius()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    const A: EulerAngles = EulerAngles::new(0.3, 0.4, 0.5);

    #[test]
    fn compose_standard_examples() {
        assert!((compose_standard(&EulerAngles::ZERO) - Mat3::IDENTITY).max_abs() == 0.0);
        let r = compose_standard(&EulerAngles::new(0.1, FRAC_PI_6, 0.2));
        assert_abs_diff_eq!(r[0][2], 0.5, epsilon = 1e-15);
        let by_hand = axis_rotation(Axis::X1, 0.3)
            * axis_rotation(Axis::X2, 0.4)
            * axis_rotation(Axis::X3, 0.5);
        assert!((compose_standard(&A) - by_hand).max_abs() <= 1e-15);
    }

    #[test]
    fn printed_composition_differs_only_in_one_entry() {
        assert_eq!(compose_printed(&EulerAngles::ZERO), Mat3::IDENTITY);
        let diff = compose_printed(&A) - compose_standard(&A);
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) != (2, 0) {
                    assert!(diff[i][j].abs() < 1e-15, "entry ({i},{j})");
                }
            }
        }
        assert!(diff[2][0].abs() > 1e-3);
        let res = orthogonality_residual(&compose_printed(&A));
        assert!(res.gram > 1e-3);
    }

    #[test]
    fn printed_composition_agrees_without_theta() {
        let a = EulerAngles::new(0.7, 0.0, -1.3);
        assert!((compose_printed(&a) - compose_standard(&a)).max_abs() < 1e-15);
    }

    #[test]
    fn rbar_examples() {
        assert_eq!(rbar_printed(&EulerAngles::ZERO), Mat3::IDENTITY);
        let r = rbar_printed(&EulerAngles::new(0.0, FRAC_PI_6, 0.0));
        assert_abs_diff_eq!(r[0][2], -0.5, epsilon = 1e-15);
    }

    #[test]
    fn generator_algebra_holds() {
        let r = verify_generator_algebra();
        assert!(r.commutator_residual <= 1e-15);
        assert_eq!(r.spot_check_residual, 0.0);
        assert_eq!(r.hermiticity_residual, 0.0);
    }

    #[test]
    fn adjoint_action_single_axis_sign() {
        let phi = 0.8;
        let b = adjoint_action(&EulerAngles::new(phi, 0.0, 0.0));
        assert!((b - axis_rotation(Axis::X1, -phi)).max_abs() < 1e-15);
        assert!((adjoint_action(&EulerAngles::ZERO) - Mat3::IDENTITY).max_abs() == 0.0);
    }

    /// Power-series exponential of `i·α·J_k`, independent of the closed form.
    fn series_exp(k: usize, alpha: f64) -> Mat3 {
        let j = generator(k);
        let mut term = [[Complex64::new(0.0, 0.0); 3]; 3];
        let mut sum = term;
        for m in 0..3 {
            term[m][m] = Complex64::new(1.0, 0.0);
            sum[m][m] = Complex64::new(1.0, 0.0);
        }
        let mut x = j;
        for row in x.iter_mut() {
            for z in row.iter_mut() {
                *z *= Complex64::new(0.0, alpha);
            }
        }
        for n in 1..40 {
            term = cmul(&term, &x);
            for row in term.iter_mut() {
                for z in row.iter_mut() {
                    *z /= n as f64;
                }
            }
            for m in 0..3 {
                for l in 0..3 {
                    sum[m][l] += term[m][l];
                }
            }
        }
        let mut out = Mat3::ZERO;
        for m in 0..3 {
            for l in 0..3 {
                assert!(sum[m][l].im.abs() < 1e-15);
                out[m][l] = sum[m][l].re;
            }
        }
        out
    }

    #[test]
    fn adjoint_action_matches_series_and_printed_rbar() {
        let series = series_exp(0, A.phi) * series_exp(1, A.theta) * series_exp(2, A.psi);
        let b = adjoint_action(&A);
        assert!((b - series).max_abs() < 1e-14);
        assert!((b - rbar_printed(&A)).max_abs() < 1e-15);
        assert!((b - compose_standard(&A.negated())).max_abs() < 1e-15);
        // Not simply the transpose of R.
        assert!((b - compose_standard(&A).transpose()).max_abs() > 0.1);
    }

    #[test]
    fn extract_round_trips() {
        let e = extract_angles(&Mat3::IDENTITY).unwrap();
        assert_eq!(e.angles, EulerAngles::ZERO);
        let e = extract_angles(&compose_standard(&A)).unwrap();
        assert_abs_diff_eq!(e.angles.phi, A.phi, epsilon = 1e-10);
        assert_abs_diff_eq!(e.angles.theta, A.theta, epsilon = 1e-10);
        assert_abs_diff_eq!(e.angles.psi, A.psi, epsilon = 1e-10);
        assert!(!e.gimbal_lock && !e.det_flipped);
    }

    #[test]
    fn extract_gimbal_lock() {
        for theta in [FRAC_PI_2, -FRAC_PI_2] {
            let q = compose_standard(&EulerAngles::new(0.4, theta, 0.9));
            let e = extract_angles(&q).unwrap();
            assert!(e.gimbal_lock);
            assert_eq!(e.angles.psi, 0.0);
            assert!(e.residual <= 1e-8, "residual {}", e.residual);
        }
    }

    #[test]
    fn extract_flips_improper_input() {
        let mut q = compose_standard(&A);
        for r in 0..3 {
            q[r][2] = -q[r][2];
        }
        let e = extract_angles(&q).unwrap();
        assert!(e.det_flipped);
        assert!(e.residual < 1e-12);
    }

    #[test]
    fn extract_rejects_non_orthogonal() {
        let err = extract_angles(&compose_printed(&A)).unwrap_err();
        assert!(matches!(err, Error::NotOrthogonal { .. }));
    }

    #[test]
    fn fit_diagonal_input() {
        let g = SymMat3::diagonal(1.0, 2.0, 3.0);
        let f = euler_fit(&g, &FitConfig::default());
        assert!(f.off_norm <= 1e-12);
        assert_eq!(f.best_start, 0);
    }

    #[test]
    fn fit_equal_row_sum_example() {
        let g = SymMat3::new(7.0, 6.0, 5.0, 1.0, 2.0, 3.0);
        let f = euler_fit(&g, &FitConfig::default());
        assert!(f.off_norm <= 1e-8 * g.frobenius());
        let mut d = f.diagonal;
        d.sort_by(f64::total_cmp);
        let r3 = 3f64.sqrt();
        for (got, want) in d.iter().zip([4.0 - r3, 4.0 + r3, 10.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-8);
        }
        assert_abs_diff_eq!(f.diagonal.iter().sum::<f64>(), 18.0, epsilon = 1e-9 * 18.0);
        assert!(f.seeded_objective.unwrap() <= 1e-16 * (1.0 + g.frobenius().powi(2)));
    }

    #[test]
    fn fit_without_oracle_seed_still_diagonalizes() {
        let g = SymMat3::new(1.0, 1.0, 1.0, 0.5, 0.5, 0.5);
        let cfg = FitConfig {
            oracle_seed: false,
            ..Default::default()
        };
        let f = euler_fit(&g, &cfg);
        assert!(f.seeded_objective.is_none());
        assert!(f.off_norm <= 1e-8 * g.frobenius(), "off {}", f.off_norm);
    }

    #[test]
    fn fit_is_deterministic() {
        let g = SymMat3::new(0.3, -2.0, 1.0, 0.7, -0.1, 0.4);
        let cfg = FitConfig {
            seed: 99,
            ..Default::default()
        };
        assert_eq!(euler_fit(&g, &cfg), euler_fit(&g, &cfg));
    }
}
