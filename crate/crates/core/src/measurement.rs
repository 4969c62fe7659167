//! Measurement scenarios.
//!
//! *Complex exponentials*: `[H]_{k,l} = exp(j Omega_l k)`, `k = 1..N_y`,
//! observed in noise whose improperness is set by a single parameter `rho`.
//!
//! *Frequency response*: a real impulse response `h` of length `N_h`,
//! sampled with period `T_S`, is observed through noisy magnitude/phase
//! pairs at `f_k = k / (N_D T_S)`, `k = 1..N_y-1`, plus a real DC value.
//! Converting the polar pairs to Cartesian form gives the linear model
//! `y = T_S D F_ss h + n` with `D = diag(1, alpha_1, ..)` and noise whose
//! (pseudo-)variances depend on the unknown magnitude and phase response.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::augmented::{ComplexLinearModel, NoiseStats};
use crate::estimators::{prepare_bwlue_real, prepare_wlls, Estimate, EstimateReport, EstimatorId, PreparedEstimator};
use crate::{tol, CMatrix, CVector, Error, RVector, Result, C64};

/// `[H]_{k,l} = exp(j Omega_l k)` for `k = 1..=n_y`.
pub fn exp_model_matrix(omegas: &[f64], n_y: usize) -> CMatrix {
    CMatrix::from_fn(n_y, omegas.len(), |k, l| {
        C64::from_polar(1.0, omegas[l] * (k + 1) as f64)
    })
}

/// `n = sqrt(1 - rho^2) n_r + j rho n_i`: unit power, pseudo-variance `1 - 2 rho^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImproperNoiseSpec {
    rho: f64,
    n: usize,
}

impl ImproperNoiseSpec {
    pub fn new(rho: f64, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::validation(
                "improperness parameter",
                format!("rho = {rho} is outside [0, 1]"),
            ));
        }
        Ok(ImproperNoiseSpec { rho, n })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stats(&self) -> NoiseStats {
        let p = 1.0 - 2.0 * self.rho * self.rho;
        NoiseStats::diagonal(&vec![1.0; self.n], &vec![C64::new(p, 0.0); self.n])
            .expect("|1 - 2 rho^2| <= 1 for rho in [0, 1]")
    }
}

pub fn gen_improper_noise<R: Rng + ?Sized>(spec: &ImproperNoiseSpec, rng: &mut R) -> CVector {
    let a = (1.0 - spec.rho * spec.rho).sqrt();
    CVector::from_fn(spec.n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(a * re, spec.rho * im)
    })
}

pub fn improper_noise_stats(spec: &ImproperNoiseSpec) -> NoiseStats {
    spec.stats()
}

/// Second-order statistics of `y = y_A exp(j y_phi)` around `alpha A exp(j phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvertedStats {
    pub alpha: f64,
    pub beta: f64,
    pub sigma2: f64,
    pub pseudo_sigma2: C64,
}

pub fn converted_noise_stats(a_k: f64, phi_k: f64, sigma_a2: f64, sigma_phi2: f64) -> ConvertedStats {
    let alpha = (-sigma_phi2 / 2.0).exp();
    let alpha2 = alpha * alpha;
    let beta = alpha2 * alpha2;
    // 1 - alpha^2 without cancellation; beta - alpha^2 = -alpha^2 (1 - alpha^2)
    let one_minus_alpha2 = -(-sigma_phi2).exp_m1();
    let a2 = a_k * a_k;
    let sigma2 = a2 * one_minus_alpha2 + sigma_a2;
    let pseudo_sigma2 = C64::from_polar(1.0, 2.0 * phi_k) * (beta * sigma_a2 - a2 * alpha2 * one_minus_alpha2);
    ConvertedStats {
        alpha,
        beta,
        sigma2,
        pseudo_sigma2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarMeasurement {
    pub y_a: f64,
    /// Wrapped to `[0, 2 pi)`.
    pub y_phi: f64,
    pub k: usize,
}

impl PolarMeasurement {
    pub fn cartesian(&self) -> C64 {
        C64::from_polar(self.y_a, self.y_phi)
    }
}

/// A real DC measurement followed by polar measurements at `k = 1..N_y-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarMeasurements {
    pub y0: f64,
    pub polar: Vec<PolarMeasurement>,
}

impl PolarMeasurements {
    pub fn n_y(&self) -> usize {
        self.polar.len() + 1
    }

    /// `[y0, y_A,1 e^{j y_phi,1}, ..]`
    pub fn to_complex(&self) -> CVector {
        CVector::from_iterator(
            self.n_y(),
            std::iter::once(C64::new(self.y0, 0.0)).chain(self.polar.iter().map(PolarMeasurement::cartesian)),
        )
    }
}

/// Per-frequency noise variances; index 0 is the DC measurement, whose
/// phase variance is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseProfile {
    pub sigma_a2: Vec<f64>,
    pub sigma_phi2: Vec<f64>,
}

impl NoiseProfile {
    pub fn new(sigma_a2: Vec<f64>, sigma_phi2: Vec<f64>) -> Result<Self> {
        if sigma_a2.len() != sigma_phi2.len() || sigma_a2.is_empty() {
            return Err(Error::Dimension(format!(
                "{} magnitude and {} phase variances",
                sigma_a2.len(),
                sigma_phi2.len()
            )));
        }
        if let Some(v) = sigma_a2
            .iter()
            .chain(&sigma_phi2)
            .find(|v| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::validation(
                "noise variance",
                format!("{v} is not a finite nonnegative number"),
            ));
        }
        Ok(NoiseProfile { sigma_a2, sigma_phi2 })
    }

    pub fn uniform(n_y: usize, sigma_a2: f64, sigma_phi2: f64) -> Result<Self> {
        Self::new(vec![sigma_a2; n_y], vec![sigma_phi2; n_y])
    }

    pub fn n_y(&self) -> usize {
        self.sigma_a2.len()
    }
}

/// Single-sided DFT model of a length-`N_h` impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyModel {
    f_ss: CMatrix,
    d: RVector,
    t_s: f64,
    n_h: usize,
    n_y: usize,
}

/// `N_D = 2 N_y - 1`.
pub fn dft_size(n_y: usize) -> usize {
    2 * n_y - 1
}

/// First `rows` rows and `cols` columns of the `n`-point DFT matrix,
/// `exp(-j 2 pi k m / n)`.
pub fn dft_submatrix(n: usize, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |k, m| {
        // reduce k*m mod n first so the angle stays small and exact
        let r = (k * m) % n;
        C64::from_polar(1.0, -TAU * r as f64 / n as f64)
    })
}

impl FrequencyModel {
    pub fn new(n_y: usize, n_h: usize, t_s: f64, sigma_phi2: &[f64]) -> Result<Self> {
        if n_y < 1 || n_h < 1 {
            return Err(Error::validation(
                "frequency model",
                format!("N_y = {n_y}, N_h = {n_h}"),
            ));
        }
        if !(t_s.is_finite() && t_s > 0.0) {
            return Err(Error::validation("sampling time", format!("{t_s}")));
        }
        if sigma_phi2.len() != n_y {
            return Err(Error::Dimension(format!(
                "{} phase variances for N_y = {n_y}",
                sigma_phi2.len()
            )));
        }
        let n_d = dft_size(n_y);
        if n_h > n_d {
            return Err(Error::Precondition(format!(
                "N_h = {n_h} taps cannot be identified from N_y = {n_y} measurements (at most 2 N_y - 1 = {n_d})"
            )));
        }
        let d = RVector::from_fn(n_y, |k, _| if k == 0 { 1.0 } else { (-sigma_phi2[k] / 2.0).exp() });
        Ok(FrequencyModel {
            f_ss: dft_submatrix(n_d, n_y, n_h),
            d,
            t_s,
            n_h,
            n_y,
        })
    }

    pub fn f_ss(&self) -> &CMatrix {
        &self.f_ss
    }

    pub fn d(&self) -> &RVector {
        &self.d
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn n_d(&self) -> usize {
        dft_size(self.n_y)
    }

    /// `T_S D F_ss`
    pub fn model_matrix(&self) -> CMatrix {
        let mut h = self.f_ss.scale(self.t_s);
        for (k, mut row) in h.row_iter_mut().enumerate() {
            row *= C64::new(self.d[k], 0.0);
        }
        h
    }

    /// `T_S F_ss`, the model without the phase-noise attenuation.
    pub fn response_matrix(&self) -> CMatrix {
        self.f_ss.scale(self.t_s)
    }

    /// True response `H(f_k) = T_S [F_ss h]_k`.
    pub fn response(&self, h: &RVector) -> CVector {
        (&self.f_ss * h.map(|v| C64::new(v, 0.0))).scale(self.t_s)
    }
}

/// Simulates DC and polar measurements of the response of `h`.
///
/// Magnitude noise is Gaussian with negative magnitudes set to zero; phase
/// noise is Gaussian and the phase is wrapped to `[0, 2 pi)`. The DC value
/// is real and is not truncated.
pub fn gen_polar_measurements<R: Rng + ?Sized>(
    h: &RVector,
    t_s: f64,
    sigma_a2: &[f64],
    sigma_phi2: &[f64],
    rng: &mut R,
) -> PolarMeasurements {
    gen_polar_measurements_scaled(h, t_s, sigma_a2, sigma_phi2, 1.0, rng)
}

/// As [`gen_polar_measurements`] with every noise sample multiplied by
/// `noise_scale`; the random stream consumed is independent of the scale.
pub fn gen_polar_measurements_scaled<R: Rng + ?Sized>(
    h: &RVector,
    t_s: f64,
    sigma_a2: &[f64],
    sigma_phi2: &[f64],
    noise_scale: f64,
    rng: &mut R,
) -> PolarMeasurements {
    let n_y = sigma_a2.len();
    assert_eq!(sigma_phi2.len(), n_y, "one phase variance per measurement");
    let f = dft_submatrix(dft_size(n_y), n_y, h.len());
    let response = (f * h.map(|v| C64::new(v, 0.0))).scale(t_s);

    let z0: f64 = rng.sample(StandardNormal);
    let y0 = response[0].re + noise_scale * sigma_a2[0].sqrt() * z0;
    let polar = (1..n_y)
        .map(|k| {
            let za: f64 = rng.sample(StandardNormal);
            let zp: f64 = rng.sample(StandardNormal);
            let (a, phi) = response[k].to_polar();
            let y_a = (a + noise_scale * sigma_a2[k].sqrt() * za).max(0.0);
            let y_phi = (phi + noise_scale * sigma_phi2[k].sqrt() * zp).rem_euclid(TAU);
            PolarMeasurement {
                y_a,
                // rem_euclid can round up to exactly 2 pi
                y_phi: if y_phi >= TAU { 0.0 } else { y_phi },
                k,
            }
        })
        .collect();
    PolarMeasurements { y0, polar }
}

/// Where the magnitude and phase entering the converted statistics come from.
#[derive(Debug, Clone, Copy)]
pub enum StatsSource<'a> {
    /// The measured `y_A`, `y_phi` themselves.
    Measurements(&'a PolarMeasurements),
    /// A response `H(f_k)`, `k = 0..N_y-1`, e.g. the true one or an estimate.
    ProvidedResponse(&'a CVector),
}

/// Diagonal converted-measurement statistics; the DC entry is
/// `sigma_0^2 = sigma~_0^2 = sigma_A,0^2` and is left unregularized.
pub fn converted_stats_vector(noise: &NoiseProfile, source: StatsSource<'_>) -> Result<NoiseStats> {
    let n_y = noise.n_y();
    let polar: Vec<(f64, f64)> = match source {
        StatsSource::Measurements(m) => {
            if m.n_y() != n_y {
                return Err(Error::Dimension(format!(
                    "{} measurements for {n_y} noise variances",
                    m.n_y()
                )));
            }
            m.polar.iter().map(|p| (p.y_a, p.y_phi)).collect()
        }
        StatsSource::ProvidedResponse(r) => {
            if r.len() != n_y {
                return Err(Error::Dimension(format!(
                    "response of length {} for {n_y} noise variances",
                    r.len()
                )));
            }
            r.iter().skip(1).map(|v| v.to_polar()).collect()
        }
    };
    let mut var = Vec::with_capacity(n_y);
    let mut pseudo = Vec::with_capacity(n_y);
    var.push(noise.sigma_a2[0]);
    pseudo.push(C64::new(noise.sigma_a2[0], 0.0));
    for (k, (a, phi)) in polar.into_iter().enumerate() {
        let s = converted_noise_stats(a, phi, noise.sigma_a2[k + 1], noise.sigma_phi2[k + 1]);
        var.push(s.sigma2);
        pseudo.push(s.pseudo_sigma2);
    }
    NoiseStats::diagonal(&var, &pseudo)
}

/// [`dc_regularize_with`] using the real-part variance as the (arbitrary)
/// imaginary-part variance, which makes the DC pseudo-variance zero.
pub fn dc_regularize(stats: &NoiseStats, model: &ComplexLinearModel) -> Result<NoiseStats> {
    let v_re = dc_real_variance(stats)?;
    dc_regularize_with(stats, model, v_re)
}

fn dc_real_variance(stats: &NoiseStats) -> Result<f64> {
    if stats.dim() == 0 {
        return Err(Error::Precondition("no DC measurement to regularize".into()));
    }
    let var = stats.cov()[(0, 0)].re;
    let pseudo = stats.pseudo_cov()[(0, 0)];
    if pseudo.im.abs() > tol::HERM * var.max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition(format!(
            "DC pseudo-variance {pseudo} is not real; the DC noise is not purely real"
        )));
    }
    Ok((var + pseudo.re) / 2.0)
}

/// Replaces the DC noise's imaginary-part variance by `imag_variance > 0`.
///
/// A real DC measurement has no imaginary noise, which makes the augmented
/// covariance singular. Because the DC row of `Im{H}` is zero and the DC
/// noise is uncorrelated with the other entries, the imaginary part of
/// `y_0` carries no information and any positive variance leaves the
/// real-parameter BWLUE unchanged. The real-part variance is preserved.
pub fn dc_regularize_with(stats: &NoiseStats, model: &ComplexLinearModel, imag_variance: f64) -> Result<NoiseStats> {
    if stats.dim() != model.n_y() {
        return Err(Error::Dimension(format!(
            "noise statistics of dimension {} for {} measurements",
            stats.dim(),
            model.n_y()
        )));
    }
    if !(imag_variance.is_finite() && imag_variance > 0.0) {
        return Err(Error::validation(
            "regularization constant",
            format!("{imag_variance} is not positive"),
        ));
    }
    let h = model.h();
    let scale = crate::linalg::max_abs(h);
    if h.row(0).iter().any(|v| v.im.abs() > tol::HERM * scale) {
        return Err(Error::Precondition(
            "the DC row of Im{H} is not zero; regularizing would change the estimate".into(),
        ));
    }
    let coupled = (1..stats.dim())
        .any(|j| stats.cov()[(0, j)] != C64::new(0.0, 0.0) || stats.pseudo_cov()[(0, j)] != C64::new(0.0, 0.0));
    if coupled {
        return Err(Error::Precondition(
            "the DC noise is correlated with other measurements; regularizing would change the estimate".into(),
        ));
    }
    let v_re = dc_real_variance(stats)?;
    Ok(stats
        .clone()
        .with_diagonal_entry(0, v_re + imag_variance, C64::new(v_re - imag_variance, 0.0)))
}

/// Double-sided spectrum `(1/T_S) [y0, y_1..y_{N_y-1}, conj(y_{N_y-1})..conj(y_1)]`.
pub fn assemble_double_sided(meas: &PolarMeasurements, t_s: f64) -> CVector {
    let y = meas.to_complex();
    let n_y = y.len();
    let n_d = dft_size(n_y);
    CVector::from_fn(n_d, |k, _| {
        let v = if k < n_y { y[k] } else { y[n_d - k].conj() };
        v / t_s
    })
}

/// Inverse `N`-point DFT, `(1/N) sum_k Y_k exp(j 2 pi k n / N)`.
pub fn idft(y: &CVector) -> CVector {
    let n = y.len();
    CVector::from_fn(n, |m, _| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            acc += y[k] * C64::from_polar(1.0, TAU * ((k * m) % n) as f64 / n as f64);
        }
        acc / n as f64
    })
}

/// Impulse response from the windowed inverse DFT of the double-sided
/// spectrum. Ignores the attenuation `D`, so it is biased under phase noise.
pub fn idft_estimator(meas: &PolarMeasurements, t_s: f64, n_h: usize) -> Result<EstimateReport> {
    let n_d = dft_size(meas.n_y());
    if n_h > n_d {
        return Err(Error::Precondition(format!("N_h = {n_h} exceeds the DFT length {n_d}")));
    }
    let full = idft(&assemble_double_sided(meas, t_s));
    let kept = full.rows(0, n_h);
    let re = RVector::from_fn(n_h, |i, _| kept[i].re);
    let residue = kept.iter().fold(0.0_f64, |m, v| m.max(v.im.abs()));
    let limit = tol::REAL * (1.0 + re.norm());
    if !(residue <= limit) {
        return Err(Error::NotReal {
            estimator: "idft",
            residue,
            limit,
        });
    }
    Ok(EstimateReport {
        x_hat: Estimate::Real(re),
        covariance: None,
        estimator: EstimatorId::Idft,
        imag_residue: residue,
    })
}

/// Model matrix, regularized statistics and measurement vector of the
/// frequency-response scenario.
pub fn build_example2_model(
    meas: &PolarMeasurements,
    freq: &FrequencyModel,
    noise: &NoiseProfile,
    source: StatsSource<'_>,
) -> Result<(ComplexLinearModel, NoiseStats, CVector)> {
    let model = ComplexLinearModel::new(freq.model_matrix())?;
    let stats = converted_stats_vector(noise, source)?;
    let stats = dc_regularize(&stats, &model)?;
    Ok((model, stats, meas.to_complex()))
}

/// Everything about the frequency-response scenario that does not change
/// from trial to trial.
#[derive(Debug, Clone)]
pub struct Example2Setup {
    freq: FrequencyModel,
    noise: NoiseProfile,
    model: ComplexLinearModel,
    /// WLLS on `T_S F_ss`: uses no noise statistics at all.
    wlls: PreparedEstimator,
    /// WLLS on `T_S D F_ss`, the first stage of the two-step estimator.
    wlls_attenuated: PreparedEstimator,
}

impl Example2Setup {
    pub fn new(n_h: usize, t_s: f64, noise: NoiseProfile) -> Result<Self> {
        let freq = FrequencyModel::new(noise.n_y(), n_h, t_s, &noise.sigma_phi2)?;
        let model = ComplexLinearModel::new(freq.model_matrix())?;
        let wlls = prepare_wlls(&ComplexLinearModel::new(freq.response_matrix())?)?;
        let wlls_attenuated = prepare_wlls(&model)?;
        Ok(Example2Setup {
            freq,
            noise,
            model,
            wlls,
            wlls_attenuated,
        })
    }

    pub fn freq(&self) -> &FrequencyModel {
        &self.freq
    }

    pub fn noise(&self) -> &NoiseProfile {
        &self.noise
    }

    pub fn model(&self) -> &ComplexLinearModel {
        &self.model
    }

    fn check(&self, meas: &PolarMeasurements) -> Result<()> {
        if meas.n_y() != self.freq.n_y() {
            return Err(Error::Dimension(format!(
                "{} measurements for a model with N_y = {}",
                meas.n_y(),
                self.freq.n_y()
            )));
        }
        Ok(())
    }

    /// Converted statistics with the DC entry regularized.
    pub fn stats(&self, source: StatsSource<'_>) -> Result<NoiseStats> {
        dc_regularize(&converted_stats_vector(&self.noise, source)?, &self.model)
    }

    pub fn idft(&self, meas: &PolarMeasurements) -> Result<EstimateReport> {
        self.check(meas)?;
        idft_estimator(meas, self.freq.t_s, self.freq.n_h)
    }

    /// WLLS ignoring the attenuation `D`, like the IDFT.
    pub fn wlls(&self, meas: &PolarMeasurements) -> Result<EstimateReport> {
        self.check(meas)?;
        self.wlls.estimate(&meas.to_complex())
    }

    pub fn bwlue(&self, meas: &PolarMeasurements, source: StatsSource<'_>) -> Result<EstimateReport> {
        self.check(meas)?;
        prepare_bwlue_real(&self.model, &self.stats(source)?)?.estimate(&meas.to_complex())
    }

    /// WLLS on the attenuated model, then the BWLUE with statistics
    /// evaluated at the resulting response.
    pub fn two_step(&self, meas: &PolarMeasurements) -> Result<EstimateReport> {
        self.check(meas)?;
        let first = self.wlls_attenuated.estimate(&meas.to_complex())?;
        let response = self.freq.response(first.real());
        let mut report = self.bwlue(meas, StatsSource::ProvidedResponse(&response))?;
        report.estimator = EstimatorId::TwoStep;
        Ok(report)
    }
}

pub fn two_step_estimator(
    meas: &PolarMeasurements,
    n_h: usize,
    t_s: f64,
    noise: &NoiseProfile,
) -> Result<EstimateReport> {
    Example2Setup::new(n_h, t_s, noise.clone())?.two_step(meas)
}

/// Principal phase in `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}
