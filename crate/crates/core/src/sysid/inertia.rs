use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const G: f64 = 9.81;
/// Minimum peak prominence as a fraction of the signal range.
pub const PEAK_PROMINENCE: f64 = 0.1;
/// Period coefficient of variation above which a warning is attached.
pub const PERIOD_CV_WARN: f64 = 0.1;

/// Bifilar pendulum suspension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumSetup {
    /// kg
    pub mass: f64,
    /// Distance between the strings (m).
    pub string_separation: f64,
    /// m
    pub string_length: f64,
}

impl PendulumSetup {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("string_separation", self.string_separation),
            ("string_length", self.string_length),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InertiaEstimate {
    /// kg·m²
    pub inertia: f64,
    pub period_avg: f64,
    pub period_cv: f64,
    pub peak_times: Vec<f64>,
    pub warnings: Vec<String>,
}

/// `m g (D T)² / (L (4π)²)`.
pub fn inertia_from_period(setup: &PendulumSetup, period: f64) -> f64 {
    let dt = setup.string_separation * period;
    setup.mass * G * dt * dt / (setup.string_length * 16.0 * PI * PI)
}

/// Indices of local maxima whose prominence is at least `min_prominence`.
///
/// Prominence is the height above the higher of the two lowest points
/// reachable on either side before meeting a taller sample.
pub fn find_peaks(y: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = y.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            // Walk across a flat top and take its middle.
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                let mid = (i + j) / 2;
                if prominence(y, i, j) >= min_prominence {
                    peaks.push(mid);
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

fn prominence(y: &[f64], start: usize, end: usize) -> f64 {
    let h = y[start];
    let mut left_min = h;
    for k in (0..start).rev() {
        if y[k] > h {
            break;
        }
        left_min = left_min.min(y[k]);
    }
    let mut right_min = h;
    for &v in &y[end + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Sub-sample peak time from a parabola through the peak and its neighbours.
fn refine_peak(t: &[f64], y: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= y.len() {
        return t[i];
    }
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        return t[i];
    }
    let off = (0.5 * (a - c) / den).clamp(-0.5, 0.5);
    if off >= 0.0 {
        t[i] + off * (t[i + 1] - t[i])
    } else {
        t[i] + off * (t[i] - t[i - 1])
    }
}

/// Estimate rotational inertia from a gyro rate trace of the swinging pendulum.
pub fn estimate_inertia(setup: &PendulumSetup, trace: &[(f64, f64)]) -> Result<InertiaEstimate> {
    setup.validate()?;
    if trace.iter().any(|(t, r)| !t.is_finite() || !r.is_finite()) {
        return Err(Error::Parse("gyro trace contains non-finite values".into()));
    }
    if trace.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Parse("gyro trace times must be strictly increasing".into()));
    }
    let t: Vec<f64> = trace.iter().map(|p| p.0).collect();
    let y: Vec<f64> = trace.iter().map(|p| p.1).collect();
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let peaks = if range > 0.0 {
        find_peaks(&y, PEAK_PROMINENCE * range)
    } else {
        Vec::new()
    };
    if peaks.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "gyro trace has {} oscillation peaks, need at least 3",
            peaks.len()
        )));
    }
    let peak_times: Vec<f64> = peaks.iter().map(|&i| refine_peak(&t, &y, i)).collect();
    let periods: Vec<f64> = peak_times.windows(2).map(|w| w[1] - w[0]).collect();
    let n = periods.len() as f64;
    let mean = periods.iter().sum::<f64>() / n;
    let var = periods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n;
    let cv = var.sqrt() / mean;
    let mut warnings = Vec::new();
    if cv > PERIOD_CV_WARN {
        warnings.push(format!("non-uniform oscillation periods (CV {:.1}%)", cv * 100.0));
    }
    Ok(InertiaEstimate {
        inertia: inertia_from_period(setup, mean),
        period_avg: mean,
        period_cv: cv,
        peak_times,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn setup() -> PendulumSetup {
        PendulumSetup {
            mass: 0.030,
            string_separation: 0.10,
            string_length: 0.50,
        }
    }

    fn sine(period: f64, dt: f64, duration: f64) -> Vec<(f64, f64)> {
        let n = (duration / dt) as usize;
        (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                (t, 2.0 * (2.0 * PI * t / period).sin())
            })
            .collect()
    }

    #[test]
    fn hand_arithmetic() {
        // 0.030 * 9.81 * 0.01 / (0.5 * 157.9137) = 3.72735e-5
        let i = inertia_from_period(&setup(), 1.0);
        let expected = 0.030 * 9.81 * 0.1 * 0.1 / (0.5 * 16.0 * PI * PI);
        assert_eq!(i, expected);
        assert_relative_eq!(i, 3.727_353e-5, max_relative = 1e-6);
    }

    #[test]
    fn quadratic_in_period() {
        let s = setup();
        assert_relative_eq!(inertia_from_period(&s, 2.0), 4.0 * inertia_from_period(&s, 1.0), max_relative = 1e-15);
    }

    #[test]
    fn recovers_sinusoid_period() {
        let dt = 0.01;
        for period in [0.37, 0.8, 1.234] {
            let est = estimate_inertia(&setup(), &sine(period, dt, 8.0)).unwrap();
            assert!((est.period_avg - period).abs() <= dt, "{period} -> {}", est.period_avg);
            assert!(est.warnings.is_empty());
        }
    }

    #[test]
    fn too_few_peaks() {
        let err = estimate_inertia(&setup(), &sine(1.0, 0.01, 2.2)).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
        let flat: Vec<_> = (0..100).map(|k| (k as f64 * 0.01, 1.0)).collect();
        assert!(matches!(estimate_inertia(&setup(), &flat), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn irregular_periods_warn() {
        let mut trace = sine(0.5, 0.005, 2.0);
        let tail = sine(1.5, 0.005, 6.0);
        let t0 = trace.last().unwrap().0 + 0.005;
        trace.extend(tail.into_iter().map(|(t, r)| (t + t0, r)));
        let est = estimate_inertia(&setup(), &trace).unwrap();
        assert_eq!(est.warnings.len(), 1);
    }

    #[test]
    fn small_ripples_are_not_peaks() {
        let y = [0.0, 1.0, 0.0, 0.02, 0.01, 0.03, 0.0, 1.0, 0.0];
        assert_eq!(find_peaks(&y, 0.1), vec![1, 7]);
    }
}
