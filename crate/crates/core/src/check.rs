//! Fast self-check: estimator equivalences, constraints and realness on
//! random instances. Used by `widelin check`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::augmented::{random_noise_stats, stack_conjugate, ComplexLinearModel, NoiseStats};
use crate::estimators::{
    analytic_covariance, blue, bwlue_real, bwlue_real_gain, bwlue_standard, ls, prepare, real_composite_blue, wlls,
    wwlls, EstimateReport, EstimatorId, WeightSpec,
};
use crate::linalg::max_abs;
use crate::measurement::{dc_regularize_with, gen_polar_measurements, Example2Setup, NoiseProfile, StatsSource};
use crate::montecarlo::trial_rng;
use crate::{tol, CMatrix, CVector, Result, C64};

/// A random model, improper noise statistics and measurement.
#[derive(Debug, Clone)]
pub struct Instance {
    pub model: ComplexLinearModel,
    pub stats: NoiseStats,
    pub y: CVector,
}

fn normal_c<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_instance<R: Rng + ?Sized>(n_y: usize, n_x: usize, rng: &mut R) -> Result<Instance> {
    let h = CMatrix::from_fn(n_y, n_x, |_, _| normal_c(rng));
    Ok(Instance {
        model: ComplexLinearModel::new(h)?,
        stats: random_noise_stats(n_y, rng),
        y: CVector::from_fn(n_y, |_, _| normal_c(rng)),
    })
}

/// `max |a - b| / max |b|`.
pub fn relative_deviation(a: &CVector, b: &CVector) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(f64::MIN_POSITIVE)
}

/// Deliberate defects for testing the checker itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Perturbs every WLLS estimate.
    Wlls,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

struct Checker {
    fault: Option<Fault>,
}

impl Checker {
    fn wlls(&self, model: &ComplexLinearModel, y: &CVector) -> Result<EstimateReport> {
        let mut r = wlls(model, y)?;
        if self.fault == Some(Fault::Wlls) {
            if let crate::estimators::Estimate::Real(x) = &mut r.x_hat {
                x[0] += 1e-3 * (1.0 + x[0].abs());
            }
        }
        Ok(r)
    }
}

fn cx(r: &EstimateReport) -> CVector {
    r.x_hat.to_complex()
}

/// Worst value of `f` over instances, with failures counted as infinite.
fn worst<F>(instances: usize, seed: u64, mut f: F) -> (f64, Option<String>)
where
    F: FnMut(&mut ChaCha8Rng) -> Result<f64>,
{
    let mut max = 0.0_f64;
    let mut first_err = None;
    for i in 0..instances {
        match f(&mut trial_rng(seed, i)) {
            Ok(v) if v.is_nan() => max = f64::INFINITY,
            Ok(v) => max = max.max(v),
            Err(e) => {
                max = f64::INFINITY;
                first_err.get_or_insert_with(|| e.to_string());
            }
        }
    }
    (max, first_err)
}

fn outcome(name: &'static str, (value, err): (f64, Option<String>), limit: f64) -> CheckOutcome {
    let passed = value <= limit;
    let detail = match err {
        Some(e) => format!("error: {e}"),
        None => format!("max {value:.3e} (limit {limit:.0e})"),
    };
    CheckOutcome { name, passed, detail }
}

/// Sizes `N_y in 3..=12`, `N_x in 1..=max_x(N_y)`.
fn dims<R: Rng + ?Sized>(rng: &mut R, max_x: impl Fn(usize) -> usize) -> (usize, usize) {
    let n_y = rng.random_range(3..=12);
    (n_y, rng.random_range(1..=max_x(n_y)))
}

/// Runs the invariant suite on `instances` random instances per relation.
pub fn run_checks(instances: usize, seed: u64, fault: Option<Fault>) -> Vec<CheckOutcome> {
    let c = Checker { fault };
    let mut out = Vec::new();

    out.push(outcome(
        "bwlue_real == real_composite_blue",
        worst(instances, seed, |rng| {
            let (n_y, n_x) = dims(rng, |n| 2 * n);
            let inst = random_instance(n_y, n_x, rng)?;
            let a = bwlue_real(&inst.model, &inst.stats, &inst.y)?;
            let b = real_composite_blue(&inst.model, &inst.stats, &inst.y)?;
            Ok(relative_deviation(&cx(&a), &cx(&b)))
        }),
        tol::EQUIV,
    ));
    out.push(outcome(
        "bwlue_real(C_aug = I) == wlls",
        worst(instances, seed + 1, |rng| {
            let (n_y, n_x) = dims(rng, |n| 2 * n);
            let inst = random_instance(n_y, n_x, rng)?;
            let a = bwlue_real(&inst.model, &NoiseStats::white(n_y), &inst.y)?;
            let b = c.wlls(&inst.model, &inst.y)?;
            Ok(relative_deviation(&cx(&a), &cx(&b)))
        }),
        tol::EQUIV,
    ));
    out.push(outcome(
        "wwlls(W = I) == wlls",
        worst(instances, seed + 2, |rng| {
            let (n_y, n_x) = dims(rng, |n| 2 * n);
            let inst = random_instance(n_y, n_x, rng)?;
            let a = wwlls(&inst.model, &WeightSpec::identity(n_y), &inst.y)?;
            let b = c.wlls(&inst.model, &inst.y)?;
            Ok(relative_deviation(&cx(&a), &cx(&b)))
        }),
        tol::EQUIV,
    ));
    out.push(outcome(
        "bwlue_standard(proper) == blue",
        worst(instances, seed + 3, |rng| {
            let (n_y, n_x) = dims(rng, |n| n - 1);
            let inst = random_instance(n_y, n_x, rng)?;
            let proper = NoiseStats::proper(inst.stats.cov().clone())?;
            let a = bwlue_standard(&inst.model, &proper, &inst.y)?;
            let b = blue(&inst.model, &proper, &inst.y)?;
            Ok(relative_deviation(&cx(&a), &cx(&b)))
        }),
        tol::EQUIV,
    ));
    out.push(outcome(
        "blue(C = I) == ls",
        worst(instances, seed + 4, |rng| {
            let (n_y, n_x) = dims(rng, |n| n);
            let inst = random_instance(n_y, n_x, rng)?;
            let a = blue(&inst.model, &NoiseStats::white(n_y), &inst.y)?;
            let b = ls(&inst.model, &inst.y)?;
            Ok(relative_deviation(&cx(&a), &cx(&b)))
        }),
        tol::EQUIV,
    ));
    out.push(outcome(
        "G_BW [H; H*] == I",
        worst(instances, seed, |rng| {
            let (n_y, n_x) = dims(rng, |n| 2 * n);
            let inst = random_instance(n_y, n_x, rng)?;
            let g = bwlue_real_gain(&inst.model, &inst.stats)?;
            let stack = stack_conjugate(inst.model.h()).into_matrix();
            Ok(max_abs(&(g * stack - CMatrix::identity(n_x, n_x))))
        }),
        tol::EQUIV,
    ));
    out.push(outcome(
        "imaginary residue of real estimators",
        worst(instances, seed, |rng| {
            let (n_y, n_x) = dims(rng, |n| 2 * n);
            let inst = random_instance(n_y, n_x, rng)?;
            let mut max = 0.0_f64;
            for id in [
                EstimatorId::Wlls,
                EstimatorId::Wwlls,
                EstimatorId::BwlueReal,
                EstimatorId::BwlueRealProper,
            ] {
                let r = prepare(id, &inst.model, &inst.stats)?.estimate(&inst.y)?;
                max = max.max(r.imag_residue / (1.0 + r.real().norm()));
            }
            Ok(max)
        }),
        tol::REAL,
    ));
    out.push(CheckOutcome {
        name: "half-measurement identifiability",
        passed: {
            let h = CMatrix::from_row_slice(1, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
            let model = ComplexLinearModel::new(h).expect("identifiable");
            let stats = NoiseStats::diagonal(&[1.0], &[C64::new(0.5, 0.0)]).expect("valid");
            let y = CVector::from_element(1, C64::new(0.3, -0.7));
            let ok = bwlue_real(&model, &stats, &y)
                .map(|r| (r.real()[0] - 0.3).abs() < 1e-12 && (r.real()[1] + 0.7).abs() < 1e-12)
                .unwrap_or(false);
            ok && blue(&model, &stats, &y).is_err() && bwlue_standard(&model, &stats, &y).is_err()
        },
        detail: "N_y = 1, N_x = 2".into(),
    });
    out.push(outcome(
        "dc regularization invariance",
        worst(instances.min(20), seed + 5, |rng| {
            let noise = NoiseProfile::uniform(10, 1e-3, 0.1)?;
            let setup = Example2Setup::new(12, 1.0, noise.clone())?;
            let h = crate::RVector::from_fn(12, |_, _| rng.sample(StandardNormal));
            let meas = gen_polar_measurements(&h, 1.0, &noise.sigma_a2, &noise.sigma_phi2, rng);
            let raw = crate::measurement::converted_stats_vector(&noise, StatsSource::Measurements(&meas))?;
            let y = meas.to_complex();
            let a = bwlue_real(setup.model(), &dc_regularize_with(&raw, setup.model(), 1.0)?, &y)?;
            let b = bwlue_real(setup.model(), &dc_regularize_with(&raw, setup.model(), 7.0)?, &y)?;
            Ok(relative_deviation(&cx(&a), &cx(&b)))
        }),
        tol::EQUIV,
    ));
    out.push(CheckOutcome {
        name: "analytic covariance of two real looks",
        passed: {
            let model = ComplexLinearModel::new(CMatrix::from_element(2, 1, C64::new(1.0, 0.0))).expect("valid");
            analytic_covariance(&model, &NoiseStats::white(2))
                .map(|c| (c[(0, 0)] - 0.25).abs() < 1e-15)
                .unwrap_or(false)
        },
        detail: "H = [1; 1], C_aug = I gives 1/4".into(),
    });
    out
}

pub fn format_table(outcomes: &[CheckOutcome]) -> String {
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    outcomes
        .iter()
        .map(|o| {
            format!(
                "{:<4}  {:<width$}  {}\n",
                if o.passed { "PASS" } else { "FAIL" },
                o.name,
                o.detail
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes() {
        let out = run_checks(10, 1, None);
        assert!(out.iter().all(|o| o.passed), "{}", format_table(&out));
    }

    #[test]
    fn injected_fault_is_named() {
        let out = run_checks(5, 1, Some(Fault::Wlls));
        let failed: Vec<_> = out.iter().filter(|o| !o.passed).map(|o| o.name).collect();
        assert_eq!(failed, vec!["bwlue_real(C_aug = I) == wlls", "wwlls(W = I) == wlls"]);
    }
}
