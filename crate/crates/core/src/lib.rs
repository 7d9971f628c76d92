//! Eigen-analysis and dynamics of three coupled time-dependent oscillators.
//!
//! The crate evaluates the frequency matrix Γ(t) of the Hamiltonian
//! `H = ½|P|² + ½XᵀΓ(t)X`, solves its spectrum in closed form and by Jacobi
//! iteration, audits Euler-angle diagonalization and the expanded conjugation
//! coefficients, builds the coupling-only modal basis, and integrates the
//! classical motion with and without the instantaneous-eigenbasis shortcut.
//!
//! | module       | contents                                               |
//! |--------------|--------------------------------------------------------|
//! | [`linalg3`]  | 3-vectors, 3×3 matrices, axis rotations, Jacobi oracle |
//! | [`spectrum`] | trigonometric eigenvalues (as printed / robust)        |
//! | [`euler`]    | Euler compositions, generators, adjoint action, fit    |
//! | [`mij`]      | expanded `M_ij` coefficients and their audit           |
//! | [`modal`]    | modal basis v, v±, transform U                         |
//! | [`dynamics`] | profiles, Γ(t), RK4, naive decoupling comparison       |
//! | [`audit`]    | seeded batch checks shared by the CLI and tests        |

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod audit;
pub mod dynamics;
pub mod error;
pub mod euler;
pub mod linalg3;
pub mod mij;
pub mod modal;
pub mod sampling;
pub mod simplex;
pub mod spectrum;

pub use error::{Error, Result};
pub use euler::EulerAngles;
pub use linalg3::{Mat3, SymMat3, Vec3};
pub use modal::ModalBasis;
pub use spectrum::{Spectrum, SpectrumMode};
