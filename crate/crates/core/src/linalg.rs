//! Dense solves for Hermitian (and real symmetric) systems.
//!
//! Every inverse that appears in an estimator formula is realised as a
//! solve against a factorization. Positive definite systems use
//! Cholesky, anything else falls back to partially pivoted LU. Both paths
//! report near-singularity through a Hager/Higham 1-norm condition
//! estimate.

use nalgebra::{ComplexField, DMatrix, DVector, Dim, Dyn, Matrix, RawStorage};

use crate::{tol, CMatrix, Error, RMatrix, Result};

/// Largest entry magnitude of a matrix.
pub fn max_abs<T, R, C, S>(m: &Matrix<T, R, C, S>) -> f64
where
    T: ComplexField<RealField = f64>,
    R: Dim,
    C: Dim,
    S: RawStorage<T, R, C>,
{
    m.iter().fold(0.0, |acc, v| acc.max(v.clone().modulus()))
}

/// `max |A - A^H| / max |A|`; zero for an exactly Hermitian matrix.
pub fn hermitian_defect<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let scale = max_abs(a);
    if scale == 0.0 {
        return 0.0;
    }
    max_abs(&(a - a.adjoint())) / scale
}

/// Solves `a X = b` for Hermitian `a`.
///
/// `role` names the matrix in error messages, e.g. "augmented noise
/// covariance".
pub fn hermitian_solve(a: &CMatrix, b: &CMatrix, role: &str) -> Result<CMatrix> {
    solve_self_adjoint(a, b, role)
}

/// Real symmetric counterpart of [`hermitian_solve`].
pub fn symmetric_solve(a: &RMatrix, b: &RMatrix, role: &str) -> Result<RMatrix> {
    solve_self_adjoint(a, b, role)
}

/// `L^-1 b` for the Cholesky factor `a = L L^H` of a Hermitian positive
/// definite `a`. Whitening with `L` keeps least-squares problems at the
/// conditioning of `L^-1 H` instead of squaring it in normal equations.
pub fn hermitian_whiten(a: &CMatrix, b: &CMatrix, role: &str) -> Result<CMatrix> {
    whiten(a, b, role)
}

/// Real symmetric counterpart of [`hermitian_whiten`].
pub fn symmetric_whiten(a: &RMatrix, b: &RMatrix, role: &str) -> Result<RMatrix> {
    whiten(a, b, role)
}

fn whiten<T>(a: &DMatrix<T>, b: &DMatrix<T>, role: &str) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64>,
{
    let (sym, norm_a) = symmetrized(a, b, role)?;
    if sym.nrows() == 0 {
        return Ok(b.clone());
    }
    let chol = positive_cholesky(sym).ok_or_else(|| singular(role, f64::INFINITY))?;
    let cond = norm_a * inverse_norm1_estimate(a.nrows(), |v| chol.solve(v));
    if !cond.is_finite() || cond > tol::COND_MAX {
        return Err(singular(role, cond));
    }
    chol.l_dirty()
        .solve_lower_triangular(b)
        .ok_or_else(|| singular(role, f64::INFINITY))
}

fn singular(role: &str, cond: f64) -> Error {
    Error::Singular {
        role: role.to_string(),
        cond,
        hint: "",
    }
}

/// Shape and structure checks; returns `(a + a^H)/2` and its 1-norm.
fn symmetrized<T>(a: &DMatrix<T>, b: &DMatrix<T>, role: &str) -> Result<(DMatrix<T>, f64)>
where
    T: ComplexField<RealField = f64>,
{
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "{role}: expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "{role}: {} rows on the left, {} on the right",
            a.nrows(),
            b.nrows()
        )));
    }
    let defect = hermitian_defect(a);
    if defect > tol::HERM {
        return Err(Error::validation(
            "Hermitian system",
            format!("{role} deviates from its adjoint by {defect:.3e} (relative)"),
        ));
    }
    let sym = (a + a.adjoint()).unscale(2.0);
    let norm_a = norm1(&sym);
    if a.nrows() > 0 && norm_a == 0.0 {
        return Err(singular(role, f64::INFINITY));
    }
    Ok((sym, norm_a))
}

// complex square roots never fail, so indefiniteness has to be read off the
// factor's diagonal
fn positive_cholesky<T>(sym: DMatrix<T>) -> Option<nalgebra::Cholesky<T, Dyn>>
where
    T: ComplexField<RealField = f64>,
{
    sym.cholesky().filter(|c| {
        c.l_dirty()
            .diagonal()
            .iter()
            .all(|d| d.clone().real() > 0.0 && d.clone().imaginary().abs() <= f64::EPSILON * d.clone().modulus())
    })
}

fn solve_self_adjoint<T>(a: &DMatrix<T>, b: &DMatrix<T>, role: &str) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64>,
{
    let (sym, norm_a) = symmetrized(a, b, role)?;
    let n = sym.nrows();
    if n == 0 {
        return Ok(b.clone());
    }
    if let Some(chol) = positive_cholesky(sym.clone()) {
        let cond = norm_a * inverse_norm1_estimate(n, |v| chol.solve(v));
        if !cond.is_finite() || cond > tol::COND_MAX {
            return Err(singular(role, cond));
        }
        return Ok(chol.solve(b));
    }

    let lu = sym.lu();
    let mut failed = false;
    let inv_norm = inverse_norm1_estimate(n, |v| {
        lu.solve(v).unwrap_or_else(|| {
            failed = true;
            DVector::from_element(n, T::from_real(f64::INFINITY))
        })
    });
    let cond = norm_a * inv_norm;
    if failed || !cond.is_finite() || cond > tol::COND_MAX {
        return Err(singular(role, cond));
    }
    lu.solve(b).ok_or_else(|| singular(role, f64::INFINITY))
}

fn norm1<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Hager's estimate of `||A^{-1}||_1` for self-adjoint `A`, refined with
/// Higham's alternating test vector. `solve` applies `A^{-1}`.
fn inverse_norm1_estimate<T, F>(n: usize, mut solve: F) -> f64
where
    T: ComplexField<RealField = f64>,
    F: FnMut(&DVector<T>) -> DVector<T>,
{
    let norm1v = |v: &DVector<T>| v.iter().map(|x| x.clone().modulus()).sum::<f64>();
    let mut x = DVector::<T>::from_element(n, T::from_real(1.0 / n as f64));
    let mut est = 0.0_f64;
    let mut last = usize::MAX;
    for iter in 0..5 {
        let y = solve(&x);
        let fresh = norm1v(&y);
        if !fresh.is_finite() {
            return f64::INFINITY;
        }
        if iter > 0 && fresh <= est {
            break;
        }
        est = fresh;
        let sign = y.map(|v| {
            let m = v.clone().modulus();
            if m == 0.0 {
                T::one()
            } else {
                v.unscale(m)
            }
        });
        let z = solve(&sign);
        let (j, zmax) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.clone().modulus()))
            .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        let ztx: f64 = z
            .iter()
            .zip(x.iter())
            .map(|(zi, xi)| (zi.clone().conjugate() * xi.clone()).real())
            .sum();
        if zmax <= ztx || j == last {
            break;
        }
        x = DVector::<T>::zeros_generic(Dyn(n), nalgebra::Const::<1>);
        x[j] = T::one();
        last = j;
    }
    let alt = DVector::<T>::from_fn(n, |i, _| {
        let mag = 1.0 + if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
        T::from_real(if i % 2 == 0 { mag } else { -mag })
    });
    let alt_est = 2.0 * norm1v(&solve(&alt)) / (3.0 * n as f64);
    est.max(alt_est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hpd(n: usize, rng: &mut impl Rng) -> CMatrix {
        let g = CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        &g * g.adjoint() + CMatrix::identity(n, n).scale(0.5)
    }

    #[test]
    fn identity_returns_rhs() {
        let b = CMatrix::from_fn(3, 2, |i, j| C64::new(i as f64, j as f64 - 1.0));
        let x = hermitian_solve(&CMatrix::identity(3, 3), &b, "identity").unwrap();
        assert!(max_abs(&(x - &b)) < 1e-15);
    }

    #[test]
    fn scaled_identity_halves() {
        let b = CMatrix::from_fn(4, 1, |i, _| C64::new(1.0 + i as f64, -2.0));
        let a = CMatrix::identity(4, 4).scale(2.0);
        let x = hermitian_solve(&a, &b, "2I").unwrap();
        assert!(max_abs(&(x - b.unscale(2.0))) < 1e-15);
    }

    #[test]
    fn random_pd_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..100 {
            let n = 1 + (trial * 7) % 64;
            let a = random_hpd(n, &mut rng);
            let b = CMatrix::from_fn(n, 3, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let x = hermitian_solve(&a, &b, "random").unwrap();
            let r = (&a * &x - &b).norm() / b.norm();
            assert!(r <= tol::SOLVE, "n={n}: residual {r}");
        }
    }

    #[test]
    fn indefinite_hermitian_uses_lu() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, 2.0),
                C64::new(0.0, -2.0),
                C64::new(-1.0, 0.0),
            ],
        );
        let b = CMatrix::from_column_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let x = hermitian_solve(&a, &b, "indefinite").unwrap();
        assert!(max_abs(&(&a * x - b)) < 1e-12);
    }

    #[test]
    fn singular_matrix_is_named() {
        let a = CMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        let err = hermitian_solve(&a, &CMatrix::identity(2, 1), "augmented noise covariance").unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
        assert!(err.to_string().contains("augmented noise covariance"));
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.5, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        );
        let err = hermitian_solve(&a, &CMatrix::identity(2, 1), "weights").unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }

    #[test]
    fn condition_estimate_tracks_scale() {
        // diag(1, 1e-14) exceeds the 1e12 bound, diag(1, 1e-6) does not
        let mk = |d: f64| RMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, d]));
        assert!(symmetric_solve(&mk(1e-6), &RMatrix::identity(2, 1), "ok").is_ok());
        assert!(symmetric_solve(&mk(1e-14), &RMatrix::identity(2, 1), "bad").is_err());
    }
}
