//! Augmented second-order statistics of complex random vectors.
//!
//! A complex vector `a` is described by its covariance `C = E[a a^H]` and
//! its complementary (pseudo-) covariance `C~ = E[a a^T]`. The augmented
//! vector `[a; a*]` has the covariance
//!
//! ```text
//!     [ C    C~ ]
//!     [ C~*  C* ]
//! ```
//!
//! which is what every widely linear estimator consumes. `a` is proper
//! when `C~ = 0`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{hermitian_defect, max_abs};
use crate::{tol, CMatrix, CVector, Error, RMatrix, RVector, Result, C64};

/// Covariance / pseudo-covariance pair of a zero-mean complex noise vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStats {
    cov: CMatrix,
    pseudo_cov: CMatrix,
}

impl NoiseStats {
    /// Validates Hermitian `cov`, symmetric `pseudo_cov` and a positive
    /// semi-definite augmented covariance.
    pub fn new(cov: CMatrix, pseudo_cov: CMatrix) -> Result<Self> {
        if !cov.is_square() || cov.shape() != pseudo_cov.shape() {
            return Err(Error::Dimension(format!(
                "covariance is {:?}, pseudo-covariance is {:?}",
                cov.shape(),
                pseudo_cov.shape()
            )));
        }
        let defect = hermitian_defect(&cov);
        if defect > tol::HERM {
            return Err(Error::validation(
                "covariance block",
                format!("not Hermitian (relative defect {defect:.3e})"),
            ));
        }
        let scale = max_abs(&pseudo_cov);
        if scale > 0.0 {
            let defect = max_abs(&(&pseudo_cov - pseudo_cov.transpose())) / scale;
            if defect > tol::HERM {
                return Err(Error::validation(
                    "pseudo-covariance block",
                    format!("not symmetric (relative defect {defect:.3e})"),
                ));
            }
        }
        let stats = NoiseStats { cov, pseudo_cov };
        let aug = build_augmented_covariance(&stats).into_matrix();
        let aug = (&aug + aug.adjoint()).unscale(2.0);
        let eig = SymmetricEigen::new(aug).eigenvalues;
        let top = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let bottom = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if top > 0.0 && bottom < tol::PSD * top {
            return Err(Error::validation(
                "noise statistics",
                format!("augmented covariance has eigenvalue {bottom:.3e} (largest {top:.3e})"),
            ));
        }
        Ok(stats)
    }

    /// Diagonal statistics (measurements independent across indices).
    ///
    /// The augmented covariance is then a permutation of the 2x2 blocks
    /// `[[v, p], [p*, v]]`, which are PSD iff `|p| <= v`.
    pub fn diagonal(variances: &[f64], pseudo: &[C64]) -> Result<Self> {
        if variances.len() != pseudo.len() {
            return Err(Error::Dimension(format!(
                "{} variances, {} pseudo-variances",
                variances.len(),
                pseudo.len()
            )));
        }
        for (k, (&v, p)) in variances.iter().zip(pseudo).enumerate() {
            if !(v >= 0.0) || p.norm() > v * (1.0 - tol::PSD) + f64::MIN_POSITIVE {
                return Err(Error::validation(
                    "noise statistics",
                    format!("entry {k}: variance {v:.6e}, |pseudo-variance| {:.6e}", p.norm()),
                ));
            }
        }
        let n = variances.len();
        Ok(NoiseStats {
            cov: CMatrix::from_diagonal(&CVector::from_iterator(n, variances.iter().map(|&v| C64::new(v, 0.0)))),
            pseudo_cov: CMatrix::from_diagonal(&CVector::from_column_slice(pseudo)),
        })
    }

    /// Proper noise: zero pseudo-covariance.
    pub fn proper(cov: CMatrix) -> Result<Self> {
        let n = cov.nrows();
        Self::new(cov, CMatrix::zeros(n, n))
    }

    /// Proper white noise with unit variance.
    pub fn white(n: usize) -> Self {
        NoiseStats {
            cov: CMatrix::identity(n, n),
            pseudo_cov: CMatrix::zeros(n, n),
        }
    }

    pub fn cov(&self) -> &CMatrix {
        &self.cov
    }

    pub fn pseudo_cov(&self) -> &CMatrix {
        &self.pseudo_cov
    }

    pub fn dim(&self) -> usize {
        self.cov.nrows()
    }

    /// Both blocks multiplied by `s >= 0`.
    pub fn scaled(&self, s: f64) -> Self {
        NoiseStats {
            cov: self.cov.scale(s),
            pseudo_cov: self.pseudo_cov.scale(s),
        }
    }

    /// Overwrites the `(k, k)` entries; used by the DC regularization.
    pub(crate) fn with_diagonal_entry(mut self, k: usize, variance: f64, pseudo: C64) -> Self {
        self.cov[(k, k)] = C64::new(variance, 0.0);
        self.pseudo_cov[(k, k)] = pseudo;
        self
    }
}

/// The `2N x 2N` augmented covariance `[[C, C~], [C~*, C*]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedCovariance(CMatrix);

impl AugmentedCovariance {
    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Half dimension `N`.
    pub fn dim(&self) -> usize {
        self.0.nrows() / 2
    }

    /// Checks the block structure; returns the name of the first violated
    /// invariant.
    pub fn check_structure(&self, tol: f64) -> std::result::Result<(), &'static str> {
        let n = self.dim();
        let m = &self.0;
        let scale = max_abs(m).max(f64::MIN_POSITIVE);
        let nw = m.view((0, 0), (n, n));
        let ne = m.view((0, n), (n, n));
        let sw = m.view((n, 0), (n, n));
        let se = m.view((n, n), (n, n));
        let close = |a: CMatrix, b: CMatrix| max_abs(&(a - b)) <= tol * scale;
        if !close(ne.clone_owned(), ne.transpose()) {
            return Err("north-east block is not symmetric");
        }
        if !close(sw.clone_owned(), ne.map(|v| v.conj())) {
            return Err("south-west block is not the conjugate of the north-east block");
        }
        if !close(se.clone_owned(), nw.map(|v| v.conj())) {
            return Err("south-east block is not the conjugate of the north-west block");
        }
        if hermitian_defect(m) > tol {
            return Err("matrix is not Hermitian");
        }
        Ok(())
    }
}

pub fn build_augmented_covariance(stats: &NoiseStats) -> AugmentedCovariance {
    let n = stats.dim();
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&stats.cov);
    m.view_mut((0, n), (n, n)).copy_from(&stats.pseudo_cov);
    m.view_mut((n, 0), (n, n))
        .copy_from(&stats.pseudo_cov.map(|v| v.conj()));
    m.view_mut((n, n), (n, n)).copy_from(&stats.cov.map(|v| v.conj()));
    AugmentedCovariance(m)
}

/// True iff every pseudo-covariance entry has magnitude `<= tol`.
pub fn is_proper(stats: &NoiseStats, tol: f64) -> bool {
    max_abs(&stats.pseudo_cov) <= tol
}

/// `[H; H*]`, the stacked measurement matrix of the real-parameter BWLUE.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateStack(CMatrix);

impl ConjugateStack {
    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

pub fn stack_conjugate(h: &CMatrix) -> ConjugateStack {
    let (r, c) = h.shape();
    let mut m = CMatrix::zeros(2 * r, c);
    m.view_mut((0, 0), (r, c)).copy_from(h);
    m.view_mut((r, 0), (r, c)).copy_from(&h.map(|v| v.conj()));
    ConjugateStack(m)
}

/// `[y; y*]`.
pub fn augment(y: &CVector) -> CVector {
    let n = y.len();
    CVector::from_fn(2 * n, |i, _| if i < n { y[i] } else { y[i - n].conj() })
}

/// `[Re y; Im y]`.
pub fn real_composite_vector(y: &CVector) -> RVector {
    let n = y.len();
    RVector::from_fn(2 * n, |i, _| if i < n { y[i].re } else { y[i - n].im })
}

/// Measurement matrix `H` of `y = H x + n` with real `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexLinearModel {
    h: CMatrix,
}

impl ComplexLinearModel {
    /// Requires `2 N_y >= N_x` and full column rank of `[Re H; Im H]`.
    pub fn new(h: CMatrix) -> Result<Self> {
        let (n_y, n_x) = h.shape();
        if n_x == 0 || n_y == 0 {
            return Err(Error::Dimension("empty measurement matrix".into()));
        }
        if 2 * n_y < n_x {
            return Err(Error::Precondition(format!(
                "{n_x} real parameters cannot be identified from {n_y} complex measurements (need 2*N_y >= N_x)"
            )));
        }
        let hr = real_composite_matrix(&h);
        let sv = hr.singular_values();
        let top = sv.max();
        let bottom = sv.min();
        if !(bottom > top * 1e-12 * (2 * n_y) as f64) {
            return Err(Error::Precondition(format!(
                "[Re H; Im H] is rank deficient (singular values {bottom:.3e} .. {top:.3e})"
            )));
        }
        Ok(ComplexLinearModel { h })
    }

    pub fn h(&self) -> &CMatrix {
        &self.h
    }

    pub fn n_y(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_x(&self) -> usize {
        self.h.ncols()
    }

    /// Noise-free measurement `H x`.
    pub fn apply(&self, x: &RVector) -> CVector {
        &self.h * x.map(|v| C64::new(v, 0.0))
    }
}

pub(crate) fn real_composite_matrix(h: &CMatrix) -> RMatrix {
    let (r, c) = h.shape();
    RMatrix::from_fn(2 * r, c, |i, j| if i < r { h[(i, j)].re } else { h[(i - r, j)].im })
}

/// Real composite model: `H_R = [Re H; Im H]` and
/// `C_R = 1/4 T^H C_aug T` with `T = [[I, jI], [I, -jI]]`.
pub fn to_real_composite(model: &ComplexLinearModel, stats: &NoiseStats) -> Result<(RMatrix, RMatrix)> {
    let n = model.n_y();
    if stats.dim() != n {
        return Err(Error::Dimension(format!(
            "model has {n} measurements, noise statistics have dimension {}",
            stats.dim()
        )));
    }
    let aug = build_augmented_covariance(stats).into_matrix();
    let one = C64::new(1.0, 0.0);
    let j = C64::new(0.0, 1.0);
    let t = CMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if r % n != c % n {
            C64::new(0.0, 0.0)
        } else if c < n {
            one
        } else if r < n {
            j
        } else {
            -j
        }
    });
    let cr = (t.adjoint() * aug * t).unscale(4.0);
    let scale = max_abs(&cr).max(f64::MIN_POSITIVE);
    let imag = cr.iter().fold(0.0_f64, |m, v| m.max(v.im.abs()));
    if imag > tol::HERM * scale {
        return Err(Error::validation(
            "real composite covariance",
            format!("imaginary residue {imag:.3e}"),
        ));
    }
    let cr: RMatrix = cr.map(|v| v.re);
    if hermitian_defect(&cr) > tol::HERM {
        return Err(Error::validation("real composite covariance", "not symmetric"));
    }
    Ok((real_composite_matrix(model.h()), cr))
}

/// Draws zero-mean Gaussian noise with prescribed covariance and
/// pseudo-covariance via the real composite representation.
#[derive(Debug, Clone)]
pub struct GaussianNoise {
    factor: RMatrix,
    n: usize,
}

impl GaussianNoise {
    pub fn new(stats: &NoiseStats) -> Result<Self> {
        let n = stats.dim();
        let model = ComplexLinearModel {
            h: CMatrix::identity(n, n),
        };
        let (_, cr) = to_real_composite(&model, stats)?;
        let eig = SymmetricEigen::new((&cr + cr.transpose()).unscale(2.0));
        let sqrt = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        let factor = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt);
        Ok(GaussianNoise { factor, n })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        let z = RVector::from_fn(2 * self.n, |_, _| rng.sample(StandardNormal));
        let r = &self.factor * z;
        CVector::from_fn(self.n, |i, _| C64::new(r[i], r[i + self.n]))
    }
}

/// Random improper noise statistics of dimension `n`, obtained from a
/// random (almost surely positive definite) real composite covariance.
pub fn random_noise_stats<R: Rng + ?Sized>(n: usize, rng: &mut R) -> NoiseStats {
    let g = RMatrix::from_fn(2 * n, 2 * n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let cr = &g * g.transpose();
    // C = Cxx + Cyy + j(Cyx - Cxy),  C~ = Cxx - Cyy + j(Cyx + Cxy)
    let cov = CMatrix::from_fn(n, n, |i, j| {
        C64::new(cr[(i, j)] + cr[(i + n, j + n)], cr[(i + n, j)] - cr[(i, j + n)])
    });
    let pseudo = CMatrix::from_fn(n, n, |i, j| {
        C64::new(cr[(i, j)] - cr[(i + n, j + n)], cr[(i + n, j)] + cr[(i, j + n)])
    });
    NoiseStats {
        cov: (&cov + cov.adjoint()).unscale(2.0),
        pseudo_cov: (&pseudo + pseudo.transpose()).unscale(2.0),
    }
}
