//! Run settings and the `key = value` configuration format.
//!
//! ```text
//! # comments start with '#'
//! seed = 7
//! example1.rho_grid = 0.1, 0.5, 0.9
//! example2.points_per_decade = 3
//! ```
//!
//! Lists are comma separated. Unknown keys are errors.

use std::path::{Path, PathBuf};

use crate::experiments::{default_rho_grid, log_grid, Example1Params, Example2Params, SweepConfig, SweepVariable};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Example1Settings {
    pub params: Example1Params,
    pub rho_grid: Vec<f64>,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example2Settings {
    pub params: Example2Params,
    pub mag_range: (f64, f64),
    pub phase_range: (f64, f64),
    pub points_per_decade: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    /// Overrides both examples' trial counts.
    pub trials: Option<usize>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub example1: Example1Settings,
    pub example2: Example2Settings,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: 1,
            trials: None,
            workers: None,
            output: None,
            example1: Example1Settings {
                params: Example1Params::default(),
                rho_grid: default_rho_grid(),
                trials: 100_000,
            },
            example2: Example2Settings {
                params: Example2Params::default(),
                mag_range: (1e-5, 1.0),
                phase_range: (1e-6, 1e-1),
                points_per_decade: 6,
                trials: 20_000,
            },
        }
    }
}

pub const KEYS: &[&str] = &[
    "seed",
    "trials",
    "workers",
    "output",
    "example1.omegas",
    "example1.n_y",
    "example1.x",
    "example1.rho_grid",
    "example1.noise_scale",
    "example1.trials",
    "example2.n_h",
    "example2.n_y",
    "example2.t_s",
    "example2.fir",
    "example2.sigma_a2",
    "example2.sigma_phi2",
    "example2.noise_scale",
    "example2.mag_range",
    "example2.phase_range",
    "example2.points_per_decade",
    "example2.trials",
];

fn bad(key: &str, value: &str, expected: &str) -> Error {
    Error::Config(format!("{key} = {value:?}: expected {expected}"))
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| bad(key, value, "a finite number"))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    let v = value.trim();
    // accept 1e5-style counts too
    v.parse::<usize>()
        .ok()
        .or_else(|| {
            v.parse::<f64>()
                .ok()
                .filter(|f| f.is_finite() && *f >= 0.0 && f.fract() == 0.0 && *f < 1e15)
                .map(|f| f as usize)
        })
        .ok_or_else(|| bad(key, value, "a nonnegative integer"))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let items: Vec<&str> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(bad(key, value, "a comma separated list of numbers"));
    }
    items.into_iter().map(|s| parse_f64(key, s)).collect()
}

fn parse_pair(key: &str, value: &str) -> Result<(f64, f64)> {
    match parse_list(key, value)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(bad(key, value, "two numbers `lo, hi`")),
    }
}

fn positive(key: &str, value: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(bad(key, value, "a positive number"))
    }
}

fn nonnegative(key: &str, value: &str, v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(bad(key, value, "a nonnegative number"))
    }
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let e1 = &mut self.example1;
        let e2 = &mut self.example2;
        match key {
            "seed" => {
                self.seed = value
                    .trim()
                    .parse()
                    .map_err(|_| bad(key, value, "an unsigned 64-bit integer"))?
            }
            "trials" => self.trials = Some(parse_usize(key, value)?),
            "workers" => self.workers = Some(parse_usize(key, value)?),
            "output" => self.output = Some(PathBuf::from(value.trim())),
            "example1.omegas" => e1.params.omegas = parse_list(key, value)?,
            "example1.n_y" => e1.params.n_y = parse_usize(key, value)?,
            "example1.x" => e1.params.x = parse_list(key, value)?,
            "example1.rho_grid" => e1.rho_grid = parse_list(key, value)?,
            "example1.noise_scale" => e1.params.noise_scale = nonnegative(key, value, parse_f64(key, value)?)?,
            "example1.trials" => e1.trials = parse_usize(key, value)?,
            "example2.n_h" => e2.params.n_h = parse_usize(key, value)?,
            "example2.n_y" => e2.params.n_y = parse_usize(key, value)?,
            "example2.t_s" => e2.params.t_s = positive(key, value, parse_f64(key, value)?)?,
            "example2.fir" => e2.params.fir = parse_list(key, value)?,
            "example2.sigma_a2" => e2.params.sigma_a2 = nonnegative(key, value, parse_f64(key, value)?)?,
            "example2.sigma_phi2" => e2.params.sigma_phi2 = nonnegative(key, value, parse_f64(key, value)?)?,
            "example2.noise_scale" => e2.params.noise_scale = nonnegative(key, value, parse_f64(key, value)?)?,
            "example2.mag_range" => e2.mag_range = parse_pair(key, value)?,
            "example2.phase_range" => e2.phase_range = parse_pair(key, value)?,
            "example2.points_per_decade" => e2.points_per_decade = parse_usize(key, value)?,
            "example2.trials" => e2.trials = parse_usize(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Like [`Settings::set`], but a key without a section is also looked
    /// up in `section` (`n_y` means `example1.n_y` when running example 1).
    pub fn set_scoped(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        if KEYS.contains(&key) || key.contains('.') {
            return self.set(key, value);
        }
        let scoped = format!("{section}.{key}");
        if KEYS.contains(&scoped.as_str()) {
            self.set(&scoped, value)
        } else {
            Err(Error::Config(format!("unknown key `{key}`")))
        }
    }

    pub fn apply_str(&mut self, text: &str, origin: &str) -> Result<()> {
        for (line, key, value) in parse_lines(text).map_err(|e| Error::Config(format!("{origin}: {e}")))? {
            self.set(&key, &value)
                .map_err(|e| Error::Config(format!("{origin}:{line}: {}", strip_prefix(&e))))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_str(&text, &path.display().to_string())
    }

    pub fn example1_trials(&self) -> usize {
        self.trials.unwrap_or(self.example1.trials)
    }

    pub fn example2_trials(&self) -> usize {
        self.trials.unwrap_or(self.example2.trials)
    }

    pub fn example1_sweep(&self) -> SweepConfig {
        SweepConfig {
            sweep_variable: SweepVariable::Rho,
            grid: self.example1.rho_grid.clone(),
            trials: self.example1_trials(),
            master_seed: self.seed,
        }
    }

    pub fn example2_sweep(&self, variable: SweepVariable) -> Result<SweepConfig> {
        let e2 = &self.example2;
        let (lo, hi) = match variable {
            SweepVariable::SigmaA2 => e2.mag_range,
            SweepVariable::SigmaPhi2 => e2.phase_range,
            SweepVariable::Rho => return Err(Error::Config("example 2 cannot sweep rho".into())),
        };
        Ok(SweepConfig {
            sweep_variable: variable,
            grid: log_grid(lo, hi, e2.points_per_decade)?,
            trials: self.example2_trials(),
            master_seed: self.seed,
        })
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

/// `(line number, key, value)` for every non-blank, non-comment line.
pub fn parse_lines(text: &str) -> Result<Vec<(usize, String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(format!("line {}: missing key", i + 1));
        }
        out.push((i + 1, key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Splits a `KEY=VALUE` command-line override.
pub fn split_override(s: &str) -> Result<(&str, &str)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| Error::Config(format!("override `{s}` is not of the form KEY=VALUE")))
}
