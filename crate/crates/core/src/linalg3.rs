//! Fixed-size 3-vector and 3×3-matrix arithmetic, axis rotations and the
//! cyclic Jacobi eigensolver that every other module uses as ground truth.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate triple (x1, x2, x3).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Vec3([x1, x2, x3])
    }

    pub fn x1(&self) -> f64 {
        self.0[0]
    }

    pub fn x2(&self) -> f64 {
        self.0[1]
    }

    pub fn x3(&self) -> f64 {
        self.0[2]
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let (a, b) = (self.0, o.0);
        Vec3([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3(self.0.map(|c| c * s))
    }

    pub fn normalized(&self) -> Vec3 {
        self.scale(1.0 / self.norm())
    }

    pub fn sum(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
        ])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3([
            self.0[0] - rhs.0[0],
            self.0[1] - rhs.0[1],
            self.0[2] - rhs.0[2],
        ])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self.scale(-1.0)
    }
}

/// Dense 3×3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Default for Mat3 {
    fn default() -> Self {
        Mat3::IDENTITY
    }
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    pub const fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows)
    }

    pub fn from_row_vecs(r0: Vec3, r1: Vec3, r2: Vec3) -> Self {
        Mat3([r0.0, r1.0, r2.0])
    }

    pub fn from_diagonal(d: [f64; 3]) -> Self {
        let mut m = Mat3::ZERO;
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3(self.0[i])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    pub fn diagonal(&self) -> [f64; 3] {
        [self.0[0][0], self.0[1][1], self.0[2][2]]
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Frobenius norm of the strictly off-diagonal part.
    pub fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    s += self.0[i][j] * self.0[i][j];
                }
            }
        }
        s.sqrt()
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        Mat3(self.0.map(|r| r.map(|v| v * s)))
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        Vec3([self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v)])
    }

    pub fn map2(&self, other: &Mat3, f: impl Fn(f64, f64) -> f64) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = f(self.0[i][j], other.0[i][j]);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// Largest |m[i][j] − m[j][i]|.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.0;
        (m[0][1] - m[1][0])
            .abs()
            .max((m[0][2] - m[2][0]).abs())
            .max((m[1][2] - m[2][1]).abs())
    }
}

impl Index<usize> for Mat3 {
    type Output = [f64; 3];
    fn index(&self, i: usize) -> &[f64; 3] {
        &self.0[i]
    }
}

impl IndexMut<usize> for Mat3 {
    fn index_mut(&mut self, i: usize) -> &mut [f64; 3] {
        &mut self.0[i]
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.mul_vec(&rhs)
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, rhs: Mat3) -> Mat3 {
        self.map2(&rhs, |a, b| a + b)
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        self.map2(&rhs, |a, b| a - b)
    }
}

/// Real symmetric 3×3 matrix stored by its six independent entries.
///
/// Diagonal `d = (ϖ₁², ϖ₂², ϖ₃²)` and couplings `(K₁₂, K₁₃, K₂₃)` when it
/// holds the frequency matrix Γ(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymMat3 {
    pub d: [f64; 3],
    pub o12: f64,
    pub o13: f64,
    pub o23: f64,
}

impl SymMat3 {
    pub const fn new(d1: f64, d2: f64, d3: f64, o12: f64, o13: f64, o23: f64) -> Self {
        SymMat3 {
            d: [d1, d2, d3],
            o12,
            o13,
            o23,
        }
    }

    pub const fn diagonal(d1: f64, d2: f64, d3: f64) -> Self {
        SymMat3::new(d1, d2, d3, 0.0, 0.0, 0.0)
    }

    pub const fn scalar(a: f64) -> Self {
        SymMat3::diagonal(a, a, a)
    }

    /// Accepts only exactly mirrored input.
    pub fn from_mat(m: &Mat3) -> Result<Self> {
        if m[0][1] != m[1][0] || m[0][2] != m[2][0] || m[1][2] != m[2][1] {
            return Err(Error::invalid(format!(
                "matrix is not exactly symmetric (max mirror gap {:e})",
                m.asymmetry()
            )));
        }
        let s = SymMat3::new(m[0][0], m[1][1], m[2][2], m[0][1], m[0][2], m[1][2]);
        if !s.is_finite() {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        Ok(s)
    }

    pub fn to_mat(&self) -> Mat3 {
        let [d1, d2, d3] = self.d;
        Mat3([
            [d1, self.o12, self.o13],
            [self.o12, d2, self.o23],
            [self.o13, self.o23, d3],
        ])
    }

    /// Off-diagonal entries in the order (K₁₂, K₁₃, K₂₃).
    pub fn couplings(&self) -> [f64; 3] {
        [self.o12, self.o13, self.o23]
    }

    pub fn trace(&self) -> f64 {
        self.d.iter().sum()
    }

    pub fn det(&self) -> f64 {
        self.to_mat().det()
    }

    pub fn frobenius(&self) -> f64 {
        let diag: f64 = self.d.iter().map(|v| v * v).sum();
        let off = self.o12 * self.o12 + self.o13 * self.o13 + self.o23 * self.o23;
        (diag + 2.0 * off).sqrt()
    }

    pub fn shifted(&self, shift: f64) -> SymMat3 {
        SymMat3 {
            d: self.d.map(|v| v - shift),
            ..*self
        }
    }

    pub fn scaled(&self, c: f64) -> SymMat3 {
        SymMat3 {
            d: self.d.map(|v| v * c),
            o12: self.o12 * c,
            o13: self.o13 * c,
            o23: self.o23 * c,
        }
    }

    /// Row sums of the full matrix.
    pub fn row_sums(&self) -> [f64; 3] {
        let [d1, d2, d3] = self.d;
        [
            d1 + self.o12 + self.o13,
            self.o12 + d2 + self.o23,
            self.o13 + self.o23 + d3,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.d.iter().all(|v| v.is_finite())
            && self.o12.is_finite()
            && self.o13.is_finite()
            && self.o23.is_finite()
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        self.to_mat().mul_vec(v)
    }

    /// Rᵀ·G·R.
    pub fn conjugate_by(&self, r: &Mat3) -> Mat3 {
        r.transpose() * self.to_mat() * *r
    }
}

/// Scale factor `1 + ‖g‖_F` used by every relative tolerance in the crate.
pub fn scale_of(g: &SymMat3) -> f64 {
    1.0 + g.frobenius()
}

/// Coordinate axis for a single-axis rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    /// One-based axis number as written in the coordinate labels.
    pub fn from_number(n: u8) -> Option<Axis> {
        match n {
            1 => Some(Axis::X1),
            2 => Some(Axis::X2),
            3 => Some(Axis::X3),
            _ => None,
        }
    }
}

/// Rotation by `angle` radians about one coordinate axis.
///
/// `X2` carries `+sin` in the (0, 2) slot, matching the middle Euler factor.
pub fn axis_rotation(axis: Axis, angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    match axis {
        Axis::X1 => Mat3([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]),
        Axis::X2 => Mat3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]),
        Axis::X3 => Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]),
    }
}

/// `(‖mᵀm − I‖_F, det m − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityResidual {
    pub gram: f64,
    pub det_minus_one: f64,
}

pub fn orthogonality_residual(m: &Mat3) -> OrthogonalityResidual {
    OrthogonalityResidual {
        gram: (m.transpose() * *m - Mat3::IDENTITY).frobenius(),
        det_minus_one: m.det() - 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiResult {
    /// Ascending.
    pub eigenvalues: [f64; 3],
    /// Column `j` is the unit eigenvector of `eigenvalues[j]`; det = +1.
    pub eigenvectors: Mat3,
    pub sweeps: usize,
    pub off_norm: f64,
}

impl JacobiResult {
    pub fn reconstruct(&self) -> Mat3 {
        let q = self.eigenvectors;
        q * Mat3::from_diagonal(self.eigenvalues) * q.transpose()
    }
}

pub const JACOBI_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 32;

const PIVOTS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Cyclic Jacobi eigendecomposition with pivot order (1,2), (1,3), (2,3).
///
/// Stops once the off-diagonal Frobenius norm is at most `tol·‖g‖_F`.
pub fn jacobi_eigen(g: &SymMat3, tol: f64, max_sweeps: usize) -> Result<JacobiResult> {
    if !(tol > 0.0) {
        return Err(Error::invalid("jacobi tolerance must be positive"));
    }
    if max_sweeps == 0 {
        return Err(Error::invalid("jacobi needs at least one sweep"));
    }
    if !g.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }

    let target = tol * g.frobenius();
    let mut a = g.to_mat();
    let mut v = Mat3::IDENTITY;
    let mut sweeps = 0;

    loop {
        let off = a.off_diagonal_norm();
        if off <= target {
            break;
        }
        if sweeps == max_sweeps {
            return Err(Error::NonConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for &(p, q) in &PIVOTS {
            rotate(&mut a, &mut v, p, q);
        }
        sweeps += 1;
    }

    // Stable sort: ties keep the original column order.
    let diag = a.diagonal();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));

    let eigenvalues = order.map(|i| diag[i]);
    let mut eigenvectors = Mat3::ZERO;
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..3 {
            eigenvectors[r][dst] = v[r][src];
        }
    }
    if eigenvectors.det() < 0.0 {
        for r in 0..3 {
            eigenvectors[r][2] = -eigenvectors[r][2];
        }
    }

    Ok(JacobiResult {
        eigenvalues,
        eigenvectors,
        sweeps,
        off_norm: a.off_diagonal_norm(),
    })
}

/// Jacobi with the crate defaults; only fails on non-finite input.
pub fn jacobi_default(g: &SymMat3) -> Result<JacobiResult> {
    jacobi_eigen(g, JACOBI_TOL, JACOBI_MAX_SWEEPS)
}

fn rotate(a: &mut Mat3, v: &mut Mat3, p: usize, q: usize) {
    let apq = a[p][q];
    if apq == 0.0 {
        return;
    }
    let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    a[p][p] -= t * apq;
    a[q][q] += t * apq;
    a[p][q] = 0.0;
    a[q][p] = 0.0;
    let r = 3 - p - q;
    let (arp, arq) = (a[r][p], a[r][q]);
    a[r][p] = c * arp - s * arq;
    a[p][r] = a[r][p];
    a[r][q] = s * arp + c * arq;
    a[q][r] = a[r][q];

    for row in 0..3 {
        let (vp, vq) = (v[row][p], v[row][q]);
        v[row][p] = c * vp - s * vq;
        v[row][q] = s * vp + c * vq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn example() -> SymMat3 {
        SymMat3::new(7.0, 6.0, 5.0, 1.0, 2.0, 3.0)
    }

    #[test]
    fn jacobi_diagonal_input() {
        let r = jacobi_eigen(&SymMat3::diagonal(1.0, 2.0, 3.0), 1e-14, 10).unwrap();
        assert_eq!(r.eigenvalues, [1.0, 2.0, 3.0]);
        assert_eq!(r.sweeps, 0);
        for i in 0..3 {
            assert_abs_diff_eq!(r.eigenvectors[i][i].abs(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn jacobi_equal_row_sum_example() {
        let r = jacobi_default(&example()).unwrap();
        let s3 = 3f64.sqrt();
        let expected = [4.0 - s3, 4.0 + s3, 10.0];
        for (got, want) in r.eigenvalues.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        let res = orthogonality_residual(&r.eigenvectors);
        assert!(res.gram < 1e-12);
        assert_abs_diff_eq!(res.det_minus_one, 0.0, epsilon = 1e-12);
        let g = example();
        assert!((r.reconstruct() - g.to_mat()).frobenius() <= 1e-12 * scale_of(&g));
    }

    #[test]
    fn jacobi_isotropic_needs_no_sweeps() {
        let r = jacobi_default(&SymMat3::scalar(4.0)).unwrap();
        assert_eq!(r.eigenvalues, [4.0; 3]);
        assert_eq!(r.sweeps, 0);
    }

    #[test]
    fn jacobi_zero_matrix() {
        let r = jacobi_default(&SymMat3::scalar(0.0)).unwrap();
        assert_eq!(r.eigenvalues, [0.0; 3]);
        assert_eq!(r.eigenvectors, Mat3::IDENTITY);
    }

    #[test]
    fn jacobi_ties_keep_column_order() {
        let r = jacobi_default(&SymMat3::diagonal(2.0, 1.0, 2.0)).unwrap();
        assert_eq!(r.eigenvalues, [1.0, 2.0, 2.0]);
        // column 0 <- e2, column 1 <- e1, column 2 <- e3 (sign fixed for det +1)
        assert_eq!(r.eigenvectors.col(0).0, [0.0, 1.0, 0.0]);
        assert_eq!(r.eigenvectors.col(1).0, [1.0, 0.0, 0.0]);
        assert_eq!(r.eigenvectors.col(2).0, [0.0, 0.0, -1.0]);
        assert_abs_diff_eq!(r.eigenvectors.det(), 1.0);
    }

    #[test]
    fn jacobi_rejects_bad_arguments() {
        let g = example();
        assert!(matches!(
            jacobi_eigen(&g, 0.0, 5),
            Err(Error::InvalidInput { .. })
        ));
        assert!(matches!(
            jacobi_eigen(&g, 1e-14, 0),
            Err(Error::InvalidInput { .. })
        ));
        let bad = SymMat3::new(f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(jacobi_default(&bad).is_err());
    }

    #[test]
    fn jacobi_reports_non_convergence() {
        let err = jacobi_eigen(&example(), 1e-300, 1).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { sweeps: 1, .. }));
    }

    #[test]
    fn axis_rotation_examples() {
        let r = axis_rotation(Axis::X3, FRAC_PI_2);
        let want = Mat3([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!((r - want).max_abs() < 1e-16);
        assert_eq!(axis_rotation(Axis::X1, 0.0), Mat3::IDENTITY);
        let r2 = axis_rotation(Axis::X2, std::f64::consts::FRAC_PI_6);
        assert_abs_diff_eq!(r2[0][2], 0.5, epsilon = 1e-15);
        assert_eq!(Axis::from_number(2), Some(Axis::X2));
        assert_eq!(Axis::from_number(4), None);
    }

    #[test]
    fn orthogonality_of_identity_and_rotations() {
        let r = orthogonality_residual(&Mat3::IDENTITY);
        assert_eq!((r.gram, r.det_minus_one), (0.0, 0.0));
        let r = orthogonality_residual(&axis_rotation(Axis::X1, 0.7));
        assert!(r.gram <= 1e-15 && r.det_minus_one.abs() <= 1e-15);
    }

    #[test]
    fn from_mat_requires_exact_mirror() {
        let mut m = example().to_mat();
        assert_eq!(SymMat3::from_mat(&m).unwrap(), example());
        m[2][1] += 1e-15;
        assert!(SymMat3::from_mat(&m).is_err());
    }

    #[test]
    fn symmetric_storage_mirrors_bitwise() {
        let m = SymMat3::new(0.1, 0.2, 0.3, 1.0 / 3.0, 2.0 / 7.0, -5.0 / 11.0).to_mat();
        assert_eq!(m, m.transpose());
    }
}
