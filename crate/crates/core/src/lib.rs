//! Widely linear classical estimation of real-valued parameter vectors
//! observed through complex-valued linear models `y = H x + n`.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] – Hermitian / symmetric positive definite solves with a
//!   condition estimate; every inverse in the crate goes through it.
//! * [`augmented`] – noise statistics, augmented covariances, conjugate
//!   stacking, propriety and the real-composite transform.
//! * [`estimators`] – LS, BLUE, the standard BWLUE, their real-part
//!   variants, WLLS/WWLLS and the BWLUE for real parameter vectors.
//! * [`measurement`] – the two simulation scenarios: tunably improper
//!   noise on complex exponentials, and polar frequency-response
//!   measurements of a real impulse response.
//! * [`montecarlo`] and [`experiments`] – seeded, schedule-independent
//!   Monte-Carlo sweeps producing `.dat`/`.csv` tables.
//! * [`io`] – measurement CSV files for the `estimate` command.
//! * [`check`] – a quick invariant suite behind `widelin check`.
//! * [`cli`] – the `widelin` command line front end.

// `!(a <= b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augmented;
pub mod check;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod montecarlo;

pub use error::{Error, Result};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

/// Numerical tolerances shared by all modules.
pub mod tol {
    /// Relative tolerance for Hermitian / symmetric structure checks.
    pub const HERM: f64 = 1e-10;
    /// Smallest admissible (relative) eigenvalue of a covariance.
    pub const PSD: f64 = -1e-10;
    /// Relative residual bound of [`crate::linalg::hermitian_solve`].
    pub const SOLVE: f64 = 1e-10;
    /// Relative tolerance for algebraically equivalent estimator routes.
    pub const EQUIV: f64 = 1e-8;
    /// Largest accepted 1-norm condition estimate.
    pub const COND_MAX: f64 = 1e12;
    /// Relative imaginary residue tolerated before dropping it.
    pub const REAL: f64 = 1e-8;
}
