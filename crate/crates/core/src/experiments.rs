//! The two Monte-Carlo studies: MSE versus noise improperness for the
//! complex-exponential model, and BMSE versus magnitude or phase noise for
//! impulse-response estimation from polar frequency-response data.

use std::fmt::{self, Write as _};

use crate::augmented::ComplexLinearModel;
use crate::estimators::{prepare, EstimatorId, PreparedEstimator};
use crate::measurement::{
    exp_model_matrix, gen_improper_noise, gen_polar_measurements_scaled, Example2Setup, ImproperNoiseSpec,
    NoiseProfile, StatsSource,
};
use crate::montecarlo::{run_trials, Executor};
use crate::{CVector, Error, RVector, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Rho,
    SigmaA2,
    SigmaPhi2,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Rho => "rho",
            SweepVariable::SigmaA2 => "sigma_a2",
            SweepVariable::SigmaPhi2 => "sigma_phi2",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sweep_variable: SweepVariable,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Config("the sweep grid is empty".into()));
        }
        if self.grid.iter().any(|v| !v.is_finite()) || self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "the sweep grid must be finite and strictly increasing".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// `10^e` with exact results for integer `e`.
fn pow10(e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 22.0 {
        let p = 10f64.powi(e.abs() as i32);
        if e >= 0.0 {
            p
        } else {
            1.0 / p
        }
    } else {
        10f64.powf(e)
    }
}

/// Log-spaced grid from `lo` to `hi` (both included) with `per_decade`
/// points per decade; `lo` and `hi` must be powers of ten.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    let (a, b) = (lo.log10().round(), hi.log10().round());
    let exact = |v: f64, e: f64| (v - pow10(e)).abs() <= 1e-12 * v;
    if !(lo > 0.0 && hi > lo && per_decade > 0 && exact(lo, a) && exact(hi, b)) {
        return Err(Error::Config(format!(
            "log grid needs powers of ten 0 < lo < hi and at least one point per decade (got {lo}, {hi}, {per_decade})"
        )));
    }
    let steps = (b - a) as usize * per_decade;
    Ok((0..=steps)
        .map(|i| {
            let whole = a + (i / per_decade) as f64;
            let frac = (i % per_decade) as f64 / per_decade as f64;
            pow10(whole) * if frac == 0.0 { 1.0 } else { 10f64.powf(frac) }
        })
        .collect())
}

/// `{0.01, 0.05, 0.1, .., 0.65, 1/sqrt(2), 0.75, .., 0.95, 0.99}`. The
/// end points 0 and 1 make the noise purely real or imaginary, which
/// makes the augmented covariance singular; 0.7 is replaced by the proper
/// case.
pub fn default_rho_grid() -> Vec<f64> {
    (0..=20)
        .map(|i| match i {
            0 => 0.01,
            14 => std::f64::consts::FRAC_1_SQRT_2,
            20 => 0.99,
            _ => i as f64 / 20.0,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub mse: Vec<f64>,
    pub se: Vec<f64>,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub columns: Vec<&'static str>,
    pub trials: usize,
    pub rows: Vec<SweepRow>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// The row whose sweep value is closest to `value`.
    pub fn row_near(&self, value: f64) -> &SweepRow {
        self.rows
            .iter()
            .min_by(|a, b| (a.value - value).abs().total_cmp(&(b.value - value).abs()))
            .expect("sweep results are never empty")
    }

    /// Whitespace-delimited table: sweep value, then one column per estimator.
    pub fn to_dat(&self) -> String {
        let mut out = format!("# {} {}\n", self.variable, self.columns.join(" "));
        for row in &self.rows {
            let cells: Vec<String> = std::iter::once(row.value)
                .chain(row.mse.iter().copied())
                .map(num)
                .collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    /// CSV with a header, standard errors and the failed-trial count.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(self.variable.name());
        for c in &self.columns {
            write!(out, ",{c}").unwrap();
        }
        for c in &self.columns {
            write!(out, ",{c}_se").unwrap();
        }
        out.push_str(",failed_trials\n");
        for row in &self.rows {
            out.push_str(&num(row.value));
            for v in row.mse.iter().chain(&row.se) {
                write!(out, ",{}", num(*v)).unwrap();
            }
            writeln!(out, ",{}", row.failed).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example1Params {
    pub omegas: Vec<f64>,
    pub n_y: usize,
    pub x: Vec<f64>,
    /// Multiplies every noise sample; 0 gives noiseless data.
    pub noise_scale: f64,
}

impl Default for Example1Params {
    fn default() -> Self {
        Example1Params {
            omegas: vec![0.1, 0.2],
            n_y: 20,
            x: vec![1.0, 1.0],
            noise_scale: 1.0,
        }
    }
}

pub const EXAMPLE1_COLUMNS: [&str; 6] = [
    "ls",
    "ls_real_part",
    "wlls",
    "bwlue_standard",
    "bwlue_standard_real_part",
    "bwlue_real",
];

const EXAMPLE1_ESTIMATORS: [EstimatorId; 6] = [
    EstimatorId::Ls,
    EstimatorId::LsRealPart,
    EstimatorId::Wlls,
    EstimatorId::BwlueStandard,
    EstimatorId::BwlueStandardRealPart,
    EstimatorId::BwlueReal,
];

fn point_label(var: SweepVariable, v: f64) -> String {
    format!("{var} = {v}")
}

/// Average MSE (over the entries of `x`) of the six estimators versus `rho`.
pub fn run_example1(cfg: &SweepConfig, params: &Example1Params, exec: &Executor) -> Result<SweepResult> {
    cfg.validate()?;
    if cfg.sweep_variable != SweepVariable::Rho {
        return Err(Error::Config(format!(
            "example 1 sweeps rho, not {}",
            cfg.sweep_variable
        )));
    }
    if params.x.len() != params.omegas.len() {
        return Err(Error::Config(format!(
            "{} parameters for {} frequencies",
            params.x.len(),
            params.omegas.len()
        )));
    }
    let model = ComplexLinearModel::new(exp_model_matrix(&params.omegas, params.n_y))?;
    let x = RVector::from_column_slice(&params.x);
    let clean = model.apply(&x);

    let mut rows = Vec::with_capacity(cfg.grid.len());
    for &rho in &cfg.grid {
        let spec = ImproperNoiseSpec::new(rho, params.n_y)?;
        let stats = spec.stats();
        let estimators = EXAMPLE1_ESTIMATORS
            .iter()
            .map(|&id| prepare(id, &model, &stats))
            .collect::<Result<Vec<PreparedEstimator>>>()?;
        let label = point_label(cfg.sweep_variable, rho);
        let (est, acc) = run_trials(exec, cfg.trials, cfg.master_seed, estimators.len(), &label, |_, rng| {
            let noise = gen_improper_noise(&spec, rng);
            let y = &clean + noise * C64::new(params.noise_scale, 0.0);
            estimators
                .iter()
                .map(|e| Ok(e.estimate(&y)?.x_hat.squared_errors(&x).mean()))
                .collect()
        })?;
        rows.push(SweepRow {
            value: rho,
            mse: est.iter().map(|e| e.mean).collect(),
            se: est.iter().map(|e| e.se).collect(),
            failed: acc.failed(),
        });
    }
    Ok(SweepResult {
        variable: cfg.sweep_variable,
        columns: EXAMPLE1_COLUMNS.to_vec(),
        trials: cfg.trials,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example2Params {
    pub n_h: usize,
    pub n_y: usize,
    pub t_s: f64,
    /// Smoothing filter applied to white Gaussian taps.
    pub fir: Vec<f64>,
    /// Magnitude noise variance when sweeping the phase noise.
    pub sigma_a2: f64,
    /// Phase noise variance when sweeping the magnitude noise.
    pub sigma_phi2: f64,
    /// Multiplies every noise sample; the estimators still use the nominal
    /// variances.
    pub noise_scale: f64,
}

impl Default for Example2Params {
    fn default() -> Self {
        Example2Params {
            n_h: 12,
            n_y: 10,
            t_s: 1.0,
            fir: vec![0.0881, 0.4408, 0.4408, 0.0881],
            sigma_a2: 1e-4,
            sigma_phi2: 1e-1,
            noise_scale: 1.0,
        }
    }
}

impl Example2Params {
    /// Number of white samples that the filter turns into `n_h` taps.
    pub fn n_white(&self) -> Result<usize> {
        (self.n_h + 1)
            .checked_sub(self.fir.len())
            .filter(|&n| n >= 1 && !self.fir.is_empty())
            .ok_or_else(|| {
                Error::Config(format!(
                    "a {}-tap filter cannot produce a {}-tap impulse response",
                    self.fir.len(),
                    self.n_h
                ))
            })
    }
}

pub const EXAMPLE2_COLUMNS: [&str; 5] = ["bwlue_real", "wlls", "two_step", "bound", "idft"];

/// Random impulse response: `n_h - len(fir) + 1` standard normal samples
/// convolved with `fir`.
pub fn draw_impulse_response<R: rand::Rng + ?Sized>(params: &Example2Params, rng: &mut R) -> Result<RVector> {
    let n_white = params.n_white()?;
    let white: Vec<f64> = (0..n_white).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
    let mut h = RVector::zeros(params.n_h);
    for (i, w) in white.iter().enumerate() {
        for (j, f) in params.fir.iter().enumerate() {
            h[i + j] += w * f;
        }
    }
    Ok(h)
}

/// Average BMSE over the taps of IDFT, WLLS, BWLUE (measurement-based
/// statistics), two-step and bound, versus magnitude or phase noise.
pub fn run_example2(cfg: &SweepConfig, params: &Example2Params, exec: &Executor) -> Result<SweepResult> {
    cfg.validate()?;
    params.n_white()?;
    let noise_at = |v: f64| match cfg.sweep_variable {
        SweepVariable::SigmaA2 => NoiseProfile::uniform(params.n_y, v, params.sigma_phi2),
        SweepVariable::SigmaPhi2 => NoiseProfile::uniform(params.n_y, params.sigma_a2, v),
        SweepVariable::Rho => Err(Error::Config("example 2 sweeps sigma_a2 or sigma_phi2, not rho".into())),
    };

    let mut rows = Vec::with_capacity(cfg.grid.len());
    for &v in &cfg.grid {
        let setup = Example2Setup::new(params.n_h, params.t_s, noise_at(v)?)?;
        let label = point_label(cfg.sweep_variable, v);
        let (est, acc) = run_trials(
            exec,
            cfg.trials,
            cfg.master_seed,
            EXAMPLE2_COLUMNS.len(),
            &label,
            |_, rng| {
                let h = draw_impulse_response(params, rng)?;
                let noise = setup.noise();
                let meas = gen_polar_measurements_scaled(
                    &h,
                    params.t_s,
                    &noise.sigma_a2,
                    &noise.sigma_phi2,
                    params.noise_scale,
                    rng,
                );
                let truth: CVector = setup.freq().response(&h);
                let bmse = |x: &RVector| (x - &h).norm_squared() / h.len() as f64;
                Ok(vec![
                    bmse(setup.bwlue(&meas, StatsSource::Measurements(&meas))?.real()),
                    bmse(setup.wlls(&meas)?.real()),
                    bmse(setup.two_step(&meas)?.real()),
                    bmse(setup.bwlue(&meas, StatsSource::ProvidedResponse(&truth))?.real()),
                    bmse(setup.idft(&meas)?.real()),
                ])
            },
        )?;
        rows.push(SweepRow {
            value: v,
            mse: est.iter().map(|e| e.mean).collect(),
            se: est.iter().map(|e| e.se).collect(),
            failed: acc.failed(),
        });
    }
    Ok(SweepResult {
        variable: cfg.sweep_variable,
        columns: EXAMPLE2_COLUMNS.to_vec(),
        trials: cfg.trials,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::analytic_covariance;

    fn cfg(var: SweepVariable, grid: Vec<f64>, trials: usize) -> SweepConfig {
        SweepConfig {
            sweep_variable: var,
            grid,
            trials,
            master_seed: 11,
        }
    }

    #[test]
    fn grids() {
        let g = log_grid(1e-5, 1.0, 6).unwrap();
        assert_eq!(g.len(), 31);
        assert_eq!(g[0], 1e-5);
        assert_eq!(g[6], 1e-4);
        assert_eq!(g[30], 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!((g[3] / 1e-5 - 10f64.sqrt()).abs() < 1e-12);
        let g = log_grid(1e-6, 1e-1, 6).unwrap();
        assert_eq!((g[0], g[30]), (1e-6, 1e-1));
        assert!(log_grid(2e-5, 1.0, 6).is_err());

        let rho = default_rho_grid();
        assert_eq!(rho.len(), 21);
        assert!(rho.windows(2).all(|w| w[0] < w[1]));
        assert!(rho.contains(&std::f64::consts::FRAC_1_SQRT_2));
    }

    #[test]
    fn config_validation() {
        assert!(cfg(SweepVariable::Rho, vec![], 1).validate().is_err());
        assert!(cfg(SweepVariable::Rho, vec![0.2, 0.1], 1).validate().is_err());
        assert!(cfg(SweepVariable::Rho, vec![0.1], 0).validate().is_err());
        let p = Example1Params::default();
        assert!(run_example1(&cfg(SweepVariable::SigmaA2, vec![0.1], 1), &p, &Executor::sequential()).is_err());
    }

    #[test]
    fn example1_zero_noise() {
        let p = Example1Params {
            noise_scale: 0.0,
            ..Default::default()
        };
        let r = run_example1(&cfg(SweepVariable::Rho, vec![0.3, 0.9], 1), &p, &Executor::sequential()).unwrap();
        for row in &r.rows {
            assert!(row.mse.iter().all(|&m| m < 1e-24), "{:?}", row.mse);
        }
    }

    #[test]
    fn example1_matches_analytic_covariance() {
        let p = Example1Params::default();
        let r = run_example1(&cfg(SweepVariable::Rho, vec![0.2], 20_000), &p, &Executor::default()).unwrap();
        let model = ComplexLinearModel::new(exp_model_matrix(&p.omegas, p.n_y)).unwrap();
        let cov = analytic_covariance(&model, &ImproperNoiseSpec::new(0.2, p.n_y).unwrap().stats()).unwrap();
        let analytic = cov.diagonal().mean();
        let i = r.column("bwlue_real").unwrap();
        let row = &r.rows[0];
        assert!(
            (row.mse[i] - analytic).abs() < 4.0 * row.se[i],
            "{} vs {analytic}",
            row.mse[i]
        );
    }

    #[test]
    fn example2_zero_noise() {
        let p = Example2Params {
            noise_scale: 0.0,
            sigma_a2: 1e-12,
            ..Default::default()
        };
        let r = run_example2(
            &cfg(SweepVariable::SigmaPhi2, vec![1e-12], 3),
            &p,
            &Executor::sequential(),
        )
        .unwrap();
        assert!(r.rows[0].mse.iter().all(|&m| m < 1e-20), "{:?}", r.rows[0].mse);
    }

    #[test]
    fn impulse_response_draw() {
        let p = Example2Params::default();
        let mut rng = crate::montecarlo::trial_rng(1, 0);
        let h = draw_impulse_response(&p, &mut rng).unwrap();
        assert_eq!(h.len(), 12);
        let bad = Example2Params {
            n_h: 2,
            ..Default::default()
        };
        assert!(draw_impulse_response(&bad, &mut rng).is_err());
    }

    #[test]
    fn tables() {
        let r = SweepResult {
            variable: SweepVariable::Rho,
            columns: vec!["a", "b"],
            trials: 2,
            rows: vec![SweepRow {
                value: 0.5,
                mse: vec![0.1, 1.0 / 3.0],
                se: vec![0.01, 0.02],
                failed: 0,
            }],
        };
        let dat = r.to_dat();
        let line = dat.lines().nth(1).unwrap();
        let cells: Vec<f64> = line.split_whitespace().map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells, vec![0.5, 0.1, 1.0 / 3.0]);
        let csv = r.to_csv();
        assert!(csv.starts_with("rho,a,b,a_se,b_se,failed_trials\n"));
    }

    #[test]
    fn example2_is_deterministic_across_executors() {
        let p = Example2Params::default();
        let c = cfg(SweepVariable::SigmaA2, vec![1e-3, 1e-2], 40);
        let a = run_example2(&c, &p, &Executor::sequential()).unwrap();
        let b = run_example2(&c, &p, &Executor::parallel(Some(4)).unwrap()).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }
}
