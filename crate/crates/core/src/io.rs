//! Measurement files for `widelin estimate` and the estimate it writes.
//!
//! Input is CSV with the header `k,f_hz,y_mag,y_phase_rad,sigma_mag2,sigma_phase2`.
//! Row `k = 0` holds the real DC value in `y_mag`, its variance in
//! `sigma_mag2`, and leaves `y_phase_rad` empty. Rows `k = 1..` hold
//! magnitude/phase pairs on the grid `f_k = k f_1`.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use crate::estimators::EstimateReport;
use crate::measurement::{dft_size, NoiseProfile, PolarMeasurement, PolarMeasurements};
use crate::{Error, Result};

pub const MEASUREMENT_HEADER: &str = "k,f_hz,y_mag,y_phase_rad,sigma_mag2,sigma_phase2";
const COLUMNS: [&str; 6] = ["k", "f_hz", "y_mag", "y_phase_rad", "sigma_mag2", "sigma_phase2"];

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFile {
    pub meas: PolarMeasurements,
    pub noise: NoiseProfile,
    /// Spacing of the frequency grid.
    pub f1: f64,
}

impl MeasurementFile {
    /// `T_S = 1 / (N_D f_1)`.
    pub fn sampling_time(&self) -> f64 {
        1.0 / (dft_size(self.meas.n_y()) as f64 * self.f1)
    }
}

pub fn read_measurement_csv(path: &Path) -> Result<MeasurementFile> {
    let text = std::fs::read_to_string(path)?;
    parse_measurement_csv(&text, path)
}

pub fn parse_measurement_csv(text: &str, path: &Path) -> Result<MeasurementFile> {
    let err = |row: usize, column: &str, msg: String| Error::Parse {
        path: PathBuf::from(path),
        row,
        column: column.to_string(),
        msg,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "header", "the file is empty".into()))?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if fields != COLUMNS {
        return Err(err(
            1,
            "header",
            format!("expected `{MEASUREMENT_HEADER}`, found `{}`", header.trim()),
        ));
    }

    let mut y0 = 0.0;
    let mut polar = Vec::new();
    let mut sigma_a2 = Vec::new();
    let mut sigma_phi2 = Vec::new();
    let mut f1 = 0.0;
    for (expected_k, (i, line)) in lines.enumerate() {
        let row = i + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != COLUMNS.len() {
            return Err(err(
                row,
                "k",
                format!("expected {} fields, found {}", COLUMNS.len(), cells.len()),
            ));
        }
        let number = |c: usize| -> Result<f64> {
            cells[c]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(row, COLUMNS[c], format!("`{}` is not a finite number", cells[c])))
        };
        let nonneg = |c: usize| -> Result<f64> {
            let v = number(c)?;
            if v < 0.0 {
                return Err(err(row, COLUMNS[c], format!("{v} is negative")));
            }
            Ok(v)
        };
        let k: usize = cells[0]
            .parse()
            .map_err(|_| err(row, "k", format!("`{}` is not a frequency index", cells[0])))?;
        if k != expected_k {
            return Err(err(row, "k", format!("expected k = {expected_k}, found {k}")));
        }
        let f = nonneg(1)?;
        if k == 0 {
            if f != 0.0 {
                return Err(err(row, "f_hz", "the DC row must have f_hz = 0".into()));
            }
            y0 = number(2)?;
            if !cells[3].is_empty() {
                return Err(err(row, "y_phase_rad", "must be empty for the DC row".into()));
            }
            sigma_a2.push(nonneg(4)?);
            sigma_phi2.push(if cells[5].is_empty() { 0.0 } else { nonneg(5)? });
            continue;
        }
        if k == 1 {
            if f <= 0.0 {
                return Err(err(row, "f_hz", "the first frequency must be positive".into()));
            }
            f1 = f;
        } else if (f - k as f64 * f1).abs() > 1e-9 * k as f64 * f1 {
            return Err(err(
                row,
                "f_hz",
                format!("frequencies must be equidistant, expected {}", k as f64 * f1),
            ));
        }
        let y_phi = number(3)?.rem_euclid(TAU);
        polar.push(PolarMeasurement {
            y_a: nonneg(2)?,
            y_phi: if y_phi >= TAU { 0.0 } else { y_phi },
            k,
        });
        sigma_a2.push(nonneg(4)?);
        sigma_phi2.push(nonneg(5)?);
    }
    if polar.is_empty() {
        return Err(err(2, "k", "need the DC row and at least one frequency".into()));
    }
    Ok(MeasurementFile {
        meas: PolarMeasurements { y0, polar },
        noise: NoiseProfile::new(sigma_a2, sigma_phi2)?,
        f1,
    })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_measurement_csv(meas: &PolarMeasurements, noise: &NoiseProfile, f1: f64) -> String {
    let mut out = format!("{MEASUREMENT_HEADER}\n");
    out.push_str(&format!("0,0,{},,{},\n", num(meas.y0), num(noise.sigma_a2[0])));
    for p in &meas.polar {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.k,
            num(p.k as f64 * f1),
            num(p.y_a),
            num(p.y_phi),
            num(noise.sigma_a2[p.k]),
            num(noise.sigma_phi2[p.k])
        ));
    }
    out
}

/// `n,h_hat,std`; `std` is empty when the estimator has no covariance.
pub fn format_h_estimate(report: &EstimateReport) -> String {
    let h = report.real();
    let mut out = String::from("n,h_hat,std\n");
    for (n, v) in h.iter().enumerate() {
        let std = report
            .covariance
            .as_ref()
            .map(|c| num(c[(n, n)].max(0.0).sqrt()))
            .unwrap_or_default();
        out.push_str(&format!("{n},{},{std}\n", num(*v)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> String {
        format!("{MEASUREMENT_HEADER}\n0,0,-0.5,,1e-4,\n1,10,1.0,0.5,1e-4,1e-2\n2,20,0.8,-0.5,1e-4,1e-2\n")
    }

    #[test]
    fn parses_and_round_trips() {
        let f = parse_measurement_csv(&sample(), Path::new("m.csv")).unwrap();
        assert_eq!(f.meas.y0, -0.5);
        assert_eq!(f.meas.n_y(), 3);
        assert!((f.meas.polar[1].y_phi - (TAU - 0.5)).abs() < 1e-15);
        assert!((f.sampling_time() - 1.0 / 50.0).abs() < 1e-15);
        let again = parse_measurement_csv(&format_measurement_csv(&f.meas, &f.noise, f.f1), Path::new("x")).unwrap();
        assert_eq!(again, f);
    }

    fn parse_err(text: &str) -> (usize, String) {
        match parse_measurement_csv(text, Path::new("m.csv")).unwrap_err() {
            Error::Parse { row, column, .. } => (row, column),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn reports_row_and_column() {
        let s = sample();
        assert_eq!(parse_err(&s.replace("0.8", "abc")), (4, "y_mag".into()));
        assert_eq!(parse_err(&s.replace("2,20", "2,25")), (4, "f_hz".into()));
        assert_eq!(parse_err(&s.replace("-0.5,,", "-0.5,0.1,")), (2, "y_phase_rad".into()));
        assert_eq!(parse_err(&s.replace("k,f_hz", "k,freq")), (1, "header".into()));
        assert_eq!(parse_err(&s.replace("2,20,", "3,20,")), (4, "k".into()));
        assert_eq!(parse_err(&s.replace("1.0,0.5", "-1.0,0.5")), (3, "y_mag".into()));
    }
}
