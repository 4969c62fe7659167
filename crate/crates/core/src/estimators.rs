//! Classical estimators for `y = H x + n` with real `x`.
//!
//! Every estimator here is widely linear, `x^ = E y + F y*`. Each one is
//! first *prepared* from the model (and noise statistics where needed),
//! which performs all factorizations, and then applied to any number of
//! measurement vectors. The free functions named after the estimators do
//! both steps at once.
//!
//! Real-constrained estimators verify that the imaginary part of
//! `E y + F y*` is negligible before dropping it; a large residue is
//! reported as [`Error::NotReal`] rather than silently truncated.

use std::fmt;

use crate::augmented::{
    build_augmented_covariance, real_composite_matrix, stack_conjugate, to_real_composite, ComplexLinearModel,
    NoiseStats,
};
use crate::linalg::{hermitian_defect, hermitian_solve, hermitian_whiten, symmetric_solve, symmetric_whiten};
use crate::{tol, CMatrix, CVector, Error, RMatrix, RVector, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorId {
    Ls,
    LsRealPart,
    Wlls,
    Wwlls,
    Blue,
    BwlueStandard,
    BwlueStandardRealPart,
    BwlueReal,
    BwlueRealProper,
    RealCompositeBlue,
    Idft,
    TwoStep,
}

impl EstimatorId {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorId::Ls => "ls",
            EstimatorId::LsRealPart => "ls_real_part",
            EstimatorId::Wlls => "wlls",
            EstimatorId::Wwlls => "wwlls",
            EstimatorId::Blue => "blue",
            EstimatorId::BwlueStandard => "bwlue_standard",
            EstimatorId::BwlueStandardRealPart => "bwlue_standard_real_part",
            EstimatorId::BwlueReal => "bwlue_real",
            EstimatorId::BwlueRealProper => "bwlue_real_proper",
            EstimatorId::RealCompositeBlue => "real_composite_blue",
            EstimatorId::Idft => "idft",
            EstimatorId::TwoStep => "two_step",
        }
    }

    /// Whether the estimator is constrained to real output.
    pub fn is_real(self) -> bool {
        !matches!(self, EstimatorId::Ls | EstimatorId::Blue | EstimatorId::BwlueStandard)
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Estimate {
    Real(RVector),
    Complex(CVector),
}

impl Estimate {
    pub fn len(&self) -> usize {
        match self {
            Estimate::Real(v) => v.len(),
            Estimate::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_real(&self) -> Option<&RVector> {
        match self {
            Estimate::Real(v) => Some(v),
            Estimate::Complex(_) => None,
        }
    }

    pub fn to_complex(&self) -> CVector {
        match self {
            Estimate::Real(v) => v.map(|r| C64::new(r, 0.0)),
            Estimate::Complex(v) => v.clone(),
        }
    }

    /// `|x^_i - x_i|^2` per component.
    pub fn squared_errors(&self, truth: &RVector) -> RVector {
        match self {
            Estimate::Real(v) => (v - truth).map(|e| e * e),
            Estimate::Complex(v) => RVector::from_fn(v.len(), |i, _| (v[i] - truth[i]).norm_sqr()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub x_hat: Estimate,
    /// Analytic estimator covariance, when the estimator provides one.
    pub covariance: Option<RMatrix>,
    pub estimator: EstimatorId,
    /// Largest imaginary magnitude before the output was made real.
    pub imag_residue: f64,
}

impl EstimateReport {
    /// The real estimate; panics for complex-output estimators.
    pub fn real(&self) -> &RVector {
        self.x_hat
            .as_real()
            .unwrap_or_else(|| panic!("{} produces complex estimates", self.estimator))
    }
}

/// Hermitian weighting matrix of the weighted WLLS cost.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    w: CMatrix,
}

impl WeightSpec {
    pub fn new(w: CMatrix) -> Result<Self> {
        let defect = hermitian_defect(&w);
        if defect > tol::HERM {
            return Err(Error::validation(
                "weighting matrix",
                format!("not Hermitian (relative defect {defect:.3e})"),
            ));
        }
        Ok(WeightSpec { w })
    }

    pub fn identity(n: usize) -> Self {
        WeightSpec {
            w: CMatrix::identity(n, n),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.w
    }
}

#[derive(Debug, Clone)]
enum Gain {
    /// `x^ = E y + F y*`
    WidelyLinear { e: CMatrix, f: CMatrix },
    /// `x^ = G [Re y; Im y]`, evaluated in real arithmetic.
    RealComposite { g: RMatrix },
}

/// An estimator with all factorizations done, ready to be applied.
#[derive(Debug, Clone)]
pub struct PreparedEstimator {
    id: EstimatorId,
    gain: Gain,
    n_y: usize,
    covariance: Option<RMatrix>,
}

impl PreparedEstimator {
    fn widely_linear(id: EstimatorId, e: CMatrix, f: CMatrix) -> Self {
        PreparedEstimator {
            id,
            n_y: e.ncols(),
            gain: Gain::WidelyLinear { e, f },
            covariance: None,
        }
    }

    fn with_covariance(mut self, cov: RMatrix) -> Self {
        self.covariance = Some(cov);
        self
    }

    pub fn id(&self) -> EstimatorId {
        self.id
    }

    pub fn covariance(&self) -> Option<&RMatrix> {
        self.covariance.as_ref()
    }

    /// `(E, F)` such that `x^ = E y + F y*`.
    pub fn gain(&self) -> (CMatrix, CMatrix) {
        match &self.gain {
            Gain::WidelyLinear { e, f } => (e.clone(), f.clone()),
            Gain::RealComposite { g } => {
                // Re y = (y + y*)/2, Im y = (y - y*)/(2j)
                let n = self.n_y;
                let g1 = g.columns(0, n);
                let g2 = g.columns(n, n);
                let e = CMatrix::from_fn(g.nrows(), n, |i, j| C64::new(g1[(i, j)], -g2[(i, j)]) * 0.5);
                let f = e.map(|v| v.conj());
                (e, f)
            }
        }
    }

    pub fn estimate(&self, y: &CVector) -> Result<EstimateReport> {
        if y.len() != self.n_y {
            return Err(Error::Dimension(format!(
                "{}: expected {} measurements, got {}",
                self.id,
                self.n_y,
                y.len()
            )));
        }
        let (x_hat, imag_residue) = match &self.gain {
            Gain::RealComposite { g } => {
                let yr = crate::augmented::real_composite_vector(y);
                (Estimate::Real(g * yr), 0.0)
            }
            Gain::WidelyLinear { e, f } => {
                let z = e * y + f * y.map(|v| v.conj());
                let residue = z.iter().fold(0.0_f64, |m, v| m.max(v.im.abs()));
                if self.id.is_real() {
                    let re = z.map(|v| v.re);
                    let limit = tol::REAL * (1.0 + re.norm());
                    if !(residue <= limit) {
                        return Err(Error::NotReal {
                            estimator: self.id.name(),
                            residue,
                            limit,
                        });
                    }
                    (Estimate::Real(re), residue)
                } else {
                    (Estimate::Complex(z), residue)
                }
            }
        };
        Ok(EstimateReport {
            x_hat,
            covariance: self.covariance.clone(),
            estimator: self.id,
            imag_residue,
        })
    }
}

fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|v| C64::new(v, 0.0))
}

fn real_part_gain(e: &CMatrix, f: &CMatrix) -> (CMatrix, CMatrix) {
    // Re(Ey + Fy*) = 1/2 (E + F*) y + 1/2 (F + E*) y*
    let e2 = (e + f.map(|v| v.conj())).unscale(2.0);
    let f2 = e2.map(|v| v.conj());
    (e2, f2)
}

fn check_stats(model: &ComplexLinearModel, stats: &NoiseStats) -> Result<()> {
    if stats.dim() != model.n_y() {
        return Err(Error::Dimension(format!(
            "model has {} measurements, noise statistics have dimension {}",
            model.n_y(),
            stats.dim()
        )));
    }
    Ok(())
}

/// `(H^H W H)^{-1} H^H W` style real-parameter gain: returns
/// `E = 1/2 (Re{H^H W H})^{-1} H^H W` and `F = E*`.
fn real_normal_gain(h: &CMatrix, wh_adj: &CMatrix, role: &str) -> Result<(CMatrix, RMatrix)> {
    // wh_adj = H^H W (N_x x N_y)
    let normal = wh_adj * h;
    let normal_re = normal.map(|v| v.re);
    let normal_re = (&normal_re + normal_re.transpose()).unscale(2.0);
    let e = hermitian_solve(&to_complex(&normal_re), wh_adj, role)?.unscale(2.0);
    Ok((e, normal_re))
}

pub fn prepare_ls(model: &ComplexLinearModel) -> Result<PreparedEstimator> {
    let h = model.h();
    let e = hermitian_solve(&(h.adjoint() * h), &h.adjoint(), "normal matrix H^H H")?;
    let f = CMatrix::zeros(e.nrows(), e.ncols());
    Ok(PreparedEstimator::widely_linear(EstimatorId::Ls, e, f))
}

pub fn prepare_ls_real_part(model: &ComplexLinearModel) -> Result<PreparedEstimator> {
    let (e, f) = prepare_ls(model)?.gain();
    let (e, f) = real_part_gain(&e, &f);
    Ok(PreparedEstimator::widely_linear(EstimatorId::LsRealPart, e, f))
}

pub fn prepare_wlls(model: &ComplexLinearModel) -> Result<PreparedEstimator> {
    let h = model.h();
    let (e, _) = real_normal_gain(h, &h.adjoint(), "normal matrix Re{H^H H}")?;
    let f = e.map(|v| v.conj());
    Ok(PreparedEstimator::widely_linear(EstimatorId::Wlls, e, f))
}

pub fn prepare_wwlls(model: &ComplexLinearModel, w: &WeightSpec) -> Result<PreparedEstimator> {
    let h = model.h();
    if w.matrix().shape() != (model.n_y(), model.n_y()) {
        return Err(Error::Dimension(format!(
            "weighting matrix is {:?}, model has {} measurements",
            w.matrix().shape(),
            model.n_y()
        )));
    }
    let (e, _) = real_normal_gain(h, &(h.adjoint() * w.matrix()), "weighted normal matrix Re{H^H W H}")?;
    let f = e.map(|v| v.conj());
    Ok(PreparedEstimator::widely_linear(EstimatorId::Wwlls, e, f))
}

pub fn prepare_blue(model: &ComplexLinearModel, stats: &NoiseStats) -> Result<PreparedEstimator> {
    check_stats(model, stats)?;
    let h = model.h();
    let k = hermitian_solve(stats.cov(), h, "noise covariance")?;
    let normal = h.adjoint() * &k;
    let e = hermitian_solve(&normal, &k.adjoint(), "normal matrix H^H C^-1 H")?;
    let f = CMatrix::zeros(e.nrows(), e.ncols());
    Ok(PreparedEstimator::widely_linear(EstimatorId::Blue, e, f))
}

/// Full augmented gain `G` of the standard BWLUE (`2N_x x 2N_y`), i.e.
/// `(H_aug^H C_aug^-1 H_aug)^-1 H_aug^H C_aug^-1` with
/// `H_aug = blockdiag(H, H*)`.
pub fn bwlue_standard_gain(model: &ComplexLinearModel, stats: &NoiseStats) -> Result<CMatrix> {
    check_stats(model, stats)?;
    let (n_y, n_x) = (model.n_y(), model.n_x());
    if n_y <= n_x {
        return Err(Error::Precondition(format!(
            "the standard BWLUE needs more complex measurements than parameters (N_y = {n_y}, N_x = {n_x})"
        )));
    }
    let h = model.h();
    let mut h_aug = CMatrix::zeros(2 * n_y, 2 * n_x);
    h_aug.view_mut((0, 0), (n_y, n_x)).copy_from(h);
    h_aug.view_mut((n_y, n_x), (n_y, n_x)).copy_from(&h.map(|v| v.conj()));
    let c_aug = build_augmented_covariance(stats).into_matrix();
    let k = hermitian_solve(&c_aug, &h_aug, "augmented noise covariance")?;
    let normal = h_aug.adjoint() * &k;
    hermitian_solve(&normal, &k.adjoint(), "augmented normal matrix")
}

pub fn prepare_bwlue_standard(model: &ComplexLinearModel, stats: &NoiseStats) -> Result<PreparedEstimator> {
    let g = bwlue_standard_gain(model, stats)?;
    let (n_y, n_x) = (model.n_y(), model.n_x());
    let e = g.view((0, 0), (n_x, n_y)).into_owned();
    let f = g.view((0, n_y), (n_x, n_y)).into_owned();
    Ok(PreparedEstimator::widely_linear(EstimatorId::BwlueStandard, e, f))
}

pub fn prepare_bwlue_standard_real_part(model: &ComplexLinearModel, stats: &NoiseStats) -> Result<PreparedEstimator> {
    let (e, f) = prepare_bwlue_standard(model, stats)?.gain();
    let (e, f) = real_part_gain(&e, &f);
    Ok(PreparedEstimator::widely_linear(
        EstimatorId::BwlueStandardRealPart,
        e,
        f,
    ))
}

const DC_HINT: &str = "; a measurement with zero imaginary-part variance and no information in its \
                       imaginary part can be repaired with measurement::dc_regularize";

fn with_hint(err: Error, hint: &'static str) -> Error {
    match err {
        Error::Singular { role, cond, .. } => Error::Singular { role, cond, hint },
        other => other,
    }
}

const BWLUE_REAL_NORMAL: &str = "normal matrix [H; H*]^H C_aug^-1 [H; H*]";

/// Gain `G_BW` (`N_x x 2N_y`) and covariance of the real-parameter BWLUE.
///
/// With `C_aug = L L^H`, `A = L^-1 [H; H*]` and `b = L^-1 [y; y*]`, the
/// estimate minimizes `|A x - b|` over real `x`, i.e. the real least-squares
/// problem `[Re A; Im A] x = [Re b; Im b]`, solved through its SVD.
fn bwlue_real_solution(model: &ComplexLinearModel, stats: &NoiseStats) -> Result<(CMatrix, RMatrix)> {
    check_stats(model, stats)?;
    let (n_y, n_x) = (model.n_y(), model.n_x());
    let m = 2 * n_y;
    let mut rhs = CMatrix::zeros(m, n_x + m);
    rhs.view_mut((0, 0), (m, n_x))
        .copy_from(stack_conjugate(model.h()).as_matrix());
    rhs.view_mut((0, n_x), (m, m)).fill_with_identity();
    let c_aug = build_augmented_covariance(stats).into_matrix();
    let white = hermitian_whiten(&c_aug, &rhs, "augmented noise covariance").map_err(|e| with_hint(e, DC_HINT))?;
    let a = white.columns(0, n_x);
    let w = white.columns(n_x, m);
    let mut a_r = RMatrix::zeros(2 * m, n_x);
    a_r.view_mut((0, 0), (m, n_x)).copy_from(&a.map(|v| v.re));
    a_r.view_mut((m, 0), (m, n_x)).copy_from(&a.map(|v| v.im));

    let (pinv, cov) = real_least_squares(a_r, BWLUE_REAL_NORMAL)?;

    // x^ = P_1 Re(W z) + P_2 Im(W z) = Re((P_1 - j P_2) W z), z = [y; y*]
    let p = CMatrix::from_fn(n_x, m, |i, k| C64::new(pinv[(i, k)], -pinv[(i, m + k)]));
    let mw = p * w;
    let (m1, m2) = (mw.columns(0, n_y), mw.columns(n_y, n_y));
    let e = (m1 + m2.map(|v| v.conj())).unscale(2.0);
    let mut g = CMatrix::zeros(n_x, m);
    g.view_mut((0, 0), (n_x, n_y)).copy_from(&e);
    g.view_mut((0, n_y), (n_x, n_y)).copy_from(&e.map(|v| v.conj()));
    Ok((g, cov))
}

/// Pseudo-inverse `(A^T A)^-1 A^T` and `(A^T A)^-1` of a full column rank
/// `a`, from its QR factorization. `role` names `A^T A`, whose condition is
/// `cond(R)^2`.
fn real_least_squares(a: RMatrix, role: &str) -> Result<(RMatrix, RMatrix)> {
    let n = a.ncols();
    let singular = |cond: f64| Error::Singular {
        role: role.to_string(),
        cond,
        hint: "",
    };
    if a.nrows() < n {
        return Err(singular(f64::INFINITY));
    }
    let qr = a.qr();
    let r = qr.r();
    let r_inv = r
        .solve_upper_triangular(&RMatrix::identity(n, n))
        .ok_or_else(|| singular(f64::INFINITY))?;
    let cond = (norm1(&r) * norm1(&r_inv)).powi(2);
    if !cond.is_finite() || cond > tol::COND_MAX {
        return Err(singular(cond));
    }
    let cov = &r_inv * r_inv.transpose();
    Ok((&r_inv * qr.q().transpose(), (&cov + cov.transpose()).unscale(2.0)))
}

fn norm1(m: &RMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Estimator matrix `G_BW` (`N_x x 2N_y`) of the BWLUE for real parameter
/// vectors; `x^ = G_BW [y; y*]`.
pub fn bwlue_real_gain(model: &ComplexLinearModel, stats: &NoiseStats) -> Result<CMatrix> {
    Ok(bwlue_real_solution(model, stats)?.0)
}

/// Covariance `([H; H*]^H C_aug^-1 [H; H*])^-1` of the real-parameter BWLUE.
pub fn analytic_covariance(model: &ComplexLinearModel, stats: &NoiseStats) -> Result<RMatrix> {
    Ok(bwlue_real_solution(model, stats)?.1)
}

/// Real composite covariance of uncorrelated measurements, or `None` when
/// the statistics have off-diagonal entries.
fn diagonal_real_composite(stats: &NoiseStats) -> Option<RMatrix> {
    let n = stats.dim();
    let zero = C64::new(0.0, 0.0);
    let (cov, pseudo) = (stats.cov(), stats.pseudo_cov());
    let off_diagonal = (0..n).any(|c| (0..n).any(|r| r != c && (cov[(r, c)] != zero || pseudo[(r, c)] != zero)));
    if off_diagonal {
        return None;
    }
    let mut c_r = RMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let (v, p) = (cov[(k, k)].re, pseudo[(k, k)]);
        c_r[(k, k)] = (v + p.re) / 2.0;
        c_r[(n + k, n + k)] = (v - p.re) / 2.0;
        c_r[(k, n + k)] = p.im / 2.0;
        c_r[(n + k, k)] = p.im / 2.0;
    }
    Some(c_r)
}

pub fn prepare_bwlue_real(model: &ComplexLinearModel, stats: &NoiseStats) -> Result<PreparedEstimator> {
    check_stats(model, stats)?;
    // uncorrelated measurements: the same estimator in real arithmetic
    if let Some(c_r) = diagonal_real_composite(stats) {
        let mut p = prepare_real_blue(&real_composite_matrix(model.h()), &c_r).map_err(|e| with_hint(e, DC_HINT))?;
        p.id = EstimatorId::BwlueReal;
        return Ok(p);
    }
    let (g, cov) = bwlue_real_solution(model, stats)?;
    let n_y = model.n_y();
    let e = g.columns(0, n_y).into_owned();
    let f = g.columns(n_y, n_y).into_owned();
    Ok(PreparedEstimator::widely_linear(EstimatorId::BwlueReal, e, f).with_covariance(cov))
}

/// Proper-noise fast path `(Re{H^H C^-1 H})^-1 Re{H^H C^-1 y}`.
pub fn prepare_bwlue_real_proper(model: &ComplexLinearModel, cov: &CMatrix) -> Result<PreparedEstimator> {
    if cov.shape() != (model.n_y(), model.n_y()) {
        return Err(Error::Dimension(format!(
            "covariance is {:?}, model has {} measurements",
            cov.shape(),
            model.n_y()
        )));
    }
    let h = model.h();
    let k = hermitian_solve(cov, h, "noise covariance")?;
    let (e, normal_re) = real_normal_gain(h, &k.adjoint(), "normal matrix Re{H^H C^-1 H}")?;
    let f = e.map(|v| v.conj());
    let n = normal_re.nrows();
    let cov_x = symmetric_solve(
        &normal_re.scale(2.0),
        &RMatrix::identity(n, n),
        "normal matrix Re{H^H C^-1 H}",
    )?;
    Ok(PreparedEstimator::widely_linear(EstimatorId::BwlueRealProper, e, f).with_covariance(cov_x))
}

/// Real BLUE `(H_R^T C_R^-1 H_R)^-1 H_R^T C_R^-1 y_R` on an explicit real
/// composite model.
pub fn prepare_real_blue(h_r: &RMatrix, c_r: &RMatrix) -> Result<PreparedEstimator> {
    if !h_r.nrows().is_multiple_of(2) || c_r.shape() != (h_r.nrows(), h_r.nrows()) {
        return Err(Error::Dimension(format!(
            "real composite model {:?} with covariance {:?}",
            h_r.shape(),
            c_r.shape()
        )));
    }
    let m = h_r.nrows();
    let mut rhs = RMatrix::zeros(m, h_r.ncols() + m);
    rhs.view_mut((0, 0), h_r.shape()).copy_from(h_r);
    rhs.view_mut((0, h_r.ncols()), (m, m)).fill_with_identity();
    let white = symmetric_whiten(c_r, &rhs, "real composite noise covariance")?;
    let (pinv, cov) = real_least_squares(
        white.columns(0, h_r.ncols()).into_owned(),
        "real composite normal matrix",
    )?;
    let g = pinv * white.columns(h_r.ncols(), m);
    Ok(PreparedEstimator {
        id: EstimatorId::RealCompositeBlue,
        n_y: h_r.nrows() / 2,
        gain: Gain::RealComposite { g },
        covariance: Some(cov),
    })
}

pub fn prepare_real_composite_blue(model: &ComplexLinearModel, stats: &NoiseStats) -> Result<PreparedEstimator> {
    let (h_r, c_r) = to_real_composite(model, stats)?;
    prepare_real_blue(&h_r, &c_r)
}

pub fn ls(model: &ComplexLinearModel, y: &CVector) -> Result<EstimateReport> {
    prepare_ls(model)?.estimate(y)
}

pub fn ls_real_part(model: &ComplexLinearModel, y: &CVector) -> Result<EstimateReport> {
    prepare_ls_real_part(model)?.estimate(y)
}

pub fn wlls(model: &ComplexLinearModel, y: &CVector) -> Result<EstimateReport> {
    prepare_wlls(model)?.estimate(y)
}

pub fn wwlls(model: &ComplexLinearModel, w: &WeightSpec, y: &CVector) -> Result<EstimateReport> {
    prepare_wwlls(model, w)?.estimate(y)
}

pub fn blue(model: &ComplexLinearModel, stats: &NoiseStats, y: &CVector) -> Result<EstimateReport> {
    prepare_blue(model, stats)?.estimate(y)
}

pub fn bwlue_standard(model: &ComplexLinearModel, stats: &NoiseStats, y: &CVector) -> Result<EstimateReport> {
    prepare_bwlue_standard(model, stats)?.estimate(y)
}

pub fn bwlue_standard_real_part(model: &ComplexLinearModel, stats: &NoiseStats, y: &CVector) -> Result<EstimateReport> {
    prepare_bwlue_standard_real_part(model, stats)?.estimate(y)
}

pub fn bwlue_real(model: &ComplexLinearModel, stats: &NoiseStats, y: &CVector) -> Result<EstimateReport> {
    prepare_bwlue_real(model, stats)?.estimate(y)
}

pub fn bwlue_real_proper(model: &ComplexLinearModel, cov: &CMatrix, y: &CVector) -> Result<EstimateReport> {
    prepare_bwlue_real_proper(model, cov)?.estimate(y)
}

pub fn real_composite_blue(model: &ComplexLinearModel, stats: &NoiseStats, y: &CVector) -> Result<EstimateReport> {
    prepare_real_composite_blue(model, stats)?.estimate(y)
}

/// Prepares any estimator that depends only on the model and (optionally)
/// the noise statistics.
pub fn prepare(id: EstimatorId, model: &ComplexLinearModel, stats: &NoiseStats) -> Result<PreparedEstimator> {
    match id {
        EstimatorId::Ls => prepare_ls(model),
        EstimatorId::LsRealPart => prepare_ls_real_part(model),
        EstimatorId::Wlls => prepare_wlls(model),
        EstimatorId::Wwlls => {
            let n = model.n_y();
            let w = hermitian_solve(stats.cov(), &CMatrix::identity(n, n), "noise covariance")?;
            prepare_wwlls(model, &WeightSpec::new((&w + w.adjoint()).unscale(2.0))?)
        }
        EstimatorId::Blue => prepare_blue(model, stats),
        EstimatorId::BwlueStandard => prepare_bwlue_standard(model, stats),
        EstimatorId::BwlueStandardRealPart => prepare_bwlue_standard_real_part(model, stats),
        EstimatorId::BwlueReal => prepare_bwlue_real(model, stats),
        EstimatorId::BwlueRealProper => prepare_bwlue_real_proper(model, stats.cov()),
        EstimatorId::RealCompositeBlue => prepare_real_composite_blue(model, stats),
        EstimatorId::Idft | EstimatorId::TwoStep => Err(Error::Precondition(format!(
            "{id} is specific to frequency-response measurements; see the measurement module"
        ))),
    }
}
