//! Bench identification: bifilar-pendulum inertia, voltage/thrust regression
//! with PWM compensation, and first-order motor time constants.

mod battery;
mod inertia;
mod motor;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

pub use battery::{
    compensate_pwm, fit_thrust_voltage, motor_voltage, pwm_for_voltage, BatteryCompParams, BatteryFit, LogCurve,
    LogForm, PwmCommand, RegionFit, PWM_MAX, SPLIT_GF,
};
pub use inertia::{
    estimate_inertia, find_peaks, inertia_from_period, InertiaEstimate, PendulumSetup, G, PEAK_PROMINENCE,
    PERIOD_CV_WARN,
};
pub use motor::{fit_time_constant, rpm_to_thrust, Direction, TimeConstantFit, POOR_FIT_R2};

use crate::error::{Error, Result};

pub const GYRO_HEADER: &str = "t,rate";
pub const THRUST_STAND_HEADER: &str = "pwm,thrust_gf,v_supply,v_onboard";
pub const TACHOMETER_HEADER: &str = "t,rpm";

/// Ordinary least squares `y = slope·x + intercept`; returns `(slope, intercept, sse)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if !(sxx > 0.0) || !sxx.is_finite() {
        return None;
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let sse = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - icpt).powi(2)).sum();
    Some((slope, icpt, sse))
}

/// Minimize a one-dimensional objective over `[lo, hi]` (both positive):
/// log-spaced scan, then golden-section refinement around the best point.
pub(crate) fn minimize_log_scale(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const GRID: usize = 240;
    let (llo, lhi) = (lo.ln(), hi.ln());
    let at = |k: usize| llo + (lhi - llo) * k as f64 / GRID as f64;
    let mut best = 0;
    let mut best_v = f64::INFINITY;
    for k in 0..=GRID {
        let v = f(at(k).exp());
        if v < best_v {
            best_v = v;
            best = k;
        }
    }
    let mut a = at(best.saturating_sub(1));
    let mut b = at((best + 1).min(GRID));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c.exp());
    let mut fd = f(d.exp());
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d.exp());
        }
    }
    let mid = 0.5 * (a + b);
    if f(mid.exp()) <= best_v {
        mid.exp()
    } else {
        at(best).exp()
    }
}

fn read_csv<T: DeserializeOwned>(path: &Path, expected: &str) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound {
            path: path.display().to_string(),
            expected: format!("CSV with header `{expected}`"),
        },
        _ => Error::Io(e),
    })?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize().enumerate() {
        out.push(rec.map_err(|e| Error::Parse(format!("{} row {}: {e} (expected `{expected}`)", path.display(), i + 1)))?);
    }
    Ok(out)
}

#[derive(Deserialize)]
struct GyroRow {
    t: f64,
    rate: f64,
}

#[derive(Deserialize)]
struct StandRow {
    pwm: f64,
    thrust_gf: f64,
    #[allow(dead_code)]
    v_supply: f64,
    v_onboard: f64,
}

#[derive(Deserialize)]
struct TachRow {
    t: f64,
    rpm: f64,
}

/// `(t, rate)` pairs.
pub fn read_gyro_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    Ok(read_csv::<GyroRow>(path, GYRO_HEADER)?.into_iter().map(|r| (r.t, r.rate)).collect())
}

/// `(thrust_gf, v_motor)` pairs.
pub fn read_thrust_stand_csv(path: &Path, pwm_max: f64) -> Result<Vec<(f64, f64)>> {
    Ok(read_csv::<StandRow>(path, THRUST_STAND_HEADER)?
        .into_iter()
        .map(|r| (r.thrust_gf, motor_voltage(r.v_onboard, r.pwm, pwm_max)))
        .collect())
}

/// `(t, thrust)` pairs using `thrust = k · rpm²`.
pub fn read_tachometer_csv(path: &Path, k: f64) -> Result<Vec<(f64, f64)>> {
    Ok(read_csv::<TachRow>(path, TACHOMETER_HEADER)?
        .into_iter()
        .map(|r| (r.t, rpm_to_thrust(r.rpm, k)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_exact() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let (m, c, sse) = linear_fit(&xs, &ys).unwrap();
        assert!((m - 2.0).abs() < 1e-12 && (c + 1.0).abs() < 1e-12 && sse < 1e-20);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn log_scale_minimizer() {
        let x = minimize_log_scale(|x| (x.ln() - 0.3f64.ln()).powi(2), 1e-3, 1e3);
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn missing_csv_names_schema() {
        let err = read_gyro_csv(Path::new("/nonexistent/gyro.csv")).unwrap_err();
        assert!(err.to_string().contains(GYRO_HEADER));
    }
}
