//! Seeded Monte-Carlo execution whose results do not depend on the schedule.
//!
//! Trial `t` always draws from stream `t` of a ChaCha8 generator seeded with
//! the master seed, so a trial sees the same random numbers whichever
//! thread runs it and whichever sweep point it belongs to. Per-trial
//! results are collected in trial order and folded sequentially.

#[cfg(feature = "parallel")]
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::augmented::{ComplexLinearModel, GaussianNoise, NoiseStats};
use crate::estimators::{prepare, Estimate, EstimatorId};
use crate::{Error, RVector, Result};

/// Largest tolerated fraction of failed trials at one sweep point.
pub const MAX_FAILURE_RATE: f64 = 1e-3;

pub fn trial_rng(master_seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial as u64);
    rng
}

#[derive(Debug, Clone)]
enum Inner {
    Sequential,
    #[cfg(feature = "parallel")]
    Pool(Arc<rayon::ThreadPool>),
}

/// Runs independent trials, either in order on the calling thread or on a
/// rayon pool.
#[derive(Debug, Clone)]
pub struct Executor {
    inner: Inner,
}

impl Default for Executor {
    fn default() -> Self {
        Executor::parallel(None).unwrap_or_else(|_| Executor::sequential())
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Executor {
            inner: Inner::Sequential,
        }
    }

    /// A pool with `workers` threads (all cores when `None`). Without the
    /// `parallel` feature this is the sequential executor.
    pub fn parallel(workers: Option<usize>) -> Result<Self> {
        if workers == Some(0) {
            return Err(Error::Config("the number of workers must be at least 1".into()));
        }
        #[cfg(feature = "parallel")]
        {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = workers {
                builder = builder.num_threads(n);
            }
            let pool = builder
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            Ok(Executor {
                inner: Inner::Pool(Arc::new(pool)),
            })
        }
        #[cfg(not(feature = "parallel"))]
        {
            Ok(Executor::sequential())
        }
    }

    pub fn workers(&self) -> usize {
        match &self.inner {
            Inner::Sequential => 1,
            #[cfg(feature = "parallel")]
            Inner::Pool(p) => p.current_num_threads(),
        }
    }

    /// `[f(0), f(1), .., f(n-1)]`, in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match &self.inner {
            Inner::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Inner::Pool(pool) => {
                use rayon::prelude::*;
                pool.install(|| (0..n).into_par_iter().map(f).collect())
            }
        }
    }
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
}

/// Running sums of per-trial error samples, several quantities at once.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    count: usize,
    failed: usize,
    first_failure: Option<String>,
}

impl Accumulator {
    pub fn new(width: usize) -> Self {
        Accumulator {
            sum: vec![0.0; width],
            sum_sq: vec![0.0; width],
            count: 0,
            failed: 0,
            first_failure: None,
        }
    }

    pub fn push(&mut self, sample: &[f64]) {
        assert_eq!(sample.len(), self.sum.len(), "sample width");
        for (i, &v) in sample.iter().enumerate() {
            self.sum[i] += v;
            self.sum_sq[i] += v * v;
        }
        self.count += 1;
    }

    pub fn fail(&mut self, err: &Error) {
        self.failed += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(err.to_string());
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn failed(&self) -> usize {
        self.failed
    }

    pub fn sums(&self) -> (&[f64], &[f64]) {
        (&self.sum, &self.sum_sq)
    }

    /// Means and standard errors, or an error when more than
    /// [`MAX_FAILURE_RATE`] of the trials failed. With a single sample the
    /// standard error is reported as zero.
    pub fn finish(&self, point: &str) -> Result<Vec<MeanEstimate>> {
        let total = self.count + self.failed;
        if self.failed as f64 > MAX_FAILURE_RATE * total as f64 || self.count == 0 {
            return Err(Error::TrialFailures {
                point: point.to_string(),
                failed: self.failed,
                trials: total,
                first: self.first_failure.clone().unwrap_or_else(|| "no trials".into()),
            });
        }
        let n = self.count as f64;
        Ok(self
            .sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(&s, &ss)| {
                let mean = s / n;
                let se = if self.count > 1 {
                    ((ss - n * mean * mean).max(0.0) / (n - 1.0) / n).sqrt()
                } else {
                    0.0
                };
                MeanEstimate { mean, se }
            })
            .collect())
    }
}

/// Runs `trials` trials; each returns one error sample per tracked
/// quantity. Failed trials are excluded from every quantity.
pub fn run_trials<F>(
    exec: &Executor,
    trials: usize,
    master_seed: u64,
    width: usize,
    point: &str,
    trial: F,
) -> Result<(Vec<MeanEstimate>, Accumulator)>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<Vec<f64>> + Sync + Send,
{
    let samples = exec.map(trials, |t| trial(t, &mut trial_rng(master_seed, t)));
    let mut acc = Accumulator::new(width);
    for s in &samples {
        match s {
            Ok(v) => acc.push(v),
            Err(e) => acc.fail(e),
        }
    }
    Ok((acc.finish(point)?, acc))
}

/// Per-component mean squared error of an estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMse {
    pub mse: RVector,
    pub se: RVector,
    /// Raw sums, in trial order; bit-identical across schedules.
    pub sum: RVector,
    pub sum_sq: RVector,
}

/// Monte-Carlo MSE of whatever `run` estimates. `run` returns the true
/// parameter vector and the estimate for one trial.
pub fn monte_carlo_mse<F>(exec: &Executor, trials: usize, master_seed: u64, run: F) -> Result<ComponentMse>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<(RVector, Estimate)> + Sync + Send,
{
    if trials < 2 {
        return Err(Error::Config("a standard error needs at least 2 trials".into()));
    }
    // the width is only known after the first trial
    let width = run(0, &mut trial_rng(master_seed, 0))?.0.len();
    let (est, acc) = run_trials(exec, trials, master_seed, width, "monte_carlo_mse", |t, rng| {
        let (truth, estimate) = run(t, rng)?;
        Ok(estimate.squared_errors(&truth).iter().copied().collect())
    })?;
    let (sum, sum_sq) = acc.sums();
    Ok(ComponentMse {
        mse: RVector::from_iterator(width, est.iter().map(|e| e.mean)),
        se: RVector::from_iterator(width, est.iter().map(|e| e.se)),
        sum: RVector::from_column_slice(sum),
        sum_sq: RVector::from_column_slice(sum_sq),
    })
}

/// MSE of a standard estimator on `y = H x + n` with Gaussian noise of the
/// given statistics.
pub fn estimator_mse(
    exec: &Executor,
    id: EstimatorId,
    model: &ComplexLinearModel,
    stats: &NoiseStats,
    x: &RVector,
    trials: usize,
    master_seed: u64,
) -> Result<ComponentMse> {
    let estimator = prepare(id, model, stats)?;
    let noise = GaussianNoise::new(stats)?;
    let clean = model.apply(x);
    monte_carlo_mse(exec, trials, master_seed, |_, rng| {
        let y = &clean + noise.sample(rng);
        Ok((x.clone(), estimator.estimate(&y)?.x_hat))
    })
}
