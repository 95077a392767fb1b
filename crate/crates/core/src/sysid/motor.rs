use serde::{Deserialize, Serialize};

use super::{linear_fit, minimize_log_scale};
use crate::error::{Error, Result};

const MIN_SAMPLES: usize = 10;
/// Coefficient of determination below which the fit is flagged.
pub const POOR_FIT_R2: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeConstantFit {
    pub direction: Direction,
    /// s
    pub tau: f64,
    /// Fitted value at the first sample.
    pub f0: f64,
    pub f_inf: f64,
    pub r_squared: f64,
    pub residual_rms: f64,
    pub warnings: Vec<String>,
}

/// Thrust from a tachometer reading with `thrust = k · rpm²`.
pub fn rpm_to_thrust(rpm: f64, k: f64) -> f64 {
    k * rpm * rpm
}

/// Least-squares fit of `f(t) = f_∞ + (f₀ − f_∞) e^(−(t − t₀)/τ)`, with `t₀` the first sample time.
pub fn fit_time_constant(trace: &[(f64, f64)], direction: Direction) -> Result<TimeConstantFit> {
    if trace.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "motor trace has {} samples, need at least {MIN_SAMPLES}",
            trace.len()
        )));
    }
    if trace.iter().any(|(t, f)| !t.is_finite() || !f.is_finite()) {
        return Err(Error::Parse("motor trace contains non-finite values".into()));
    }
    if trace.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Parse("motor trace times must be strictly increasing".into()));
    }
    let t0 = trace[0].0;
    let ts: Vec<f64> = trace.iter().map(|p| p.0 - t0).collect();
    let ys: Vec<f64> = trace.iter().map(|p| p.1).collect();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let sst: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let scale = ys.iter().map(|y| y.abs()).fold(0.0, f64::max).max(1e-300);
    if sst.sqrt() <= 1e-12 * scale * (ys.len() as f64).sqrt() {
        return Err(Error::InsufficientDynamics("motor trace does not vary".into()));
    }

    let span = ts[ts.len() - 1];
    let step = ts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let fit_at = |tau: f64| {
        let xs: Vec<f64> = ts.iter().map(|t| (-t / tau).exp()).collect();
        linear_fit(&xs, &ys)
    };
    let tau = minimize_log_scale(|tau| fit_at(tau).map_or(f64::INFINITY, |r| r.2), step * 0.1, span * 10.0);
    let (amp, f_inf, sse) = fit_at(tau).expect("profile minimum is finite");
    let f0 = f_inf + amp;
    let r_squared = 1.0 - sse / sst;

    let rising = f_inf > f0;
    if rising != (direction == Direction::Up) {
        return Err(Error::InvalidParameter(format!(
            "trace trends {} but direction is {:?}",
            if rising { "up" } else { "down" },
            direction
        )));
    }
    let mut warnings = Vec::new();
    if r_squared < POOR_FIT_R2 {
        warnings.push(format!("poor exponential fit (R² = {r_squared:.3})"));
    }
    if tau >= span {
        warnings.push("time constant exceeds the trace duration".into());
    }
    Ok(TimeConstantFit {
        direction,
        tau,
        f0,
        f_inf,
        r_squared,
        residual_rms: (sse / ys.len() as f64).sqrt(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{motor_response, QuadParams};
    use proptest::prelude::*;

    fn exp_trace(tau: f64, f0: f64, f_inf: f64, t_start: f64) -> Vec<(f64, f64)> {
        (0..120)
            .map(|k| {
                let t = k as f64 * 0.005;
                (t + t_start, f_inf + (f0 - f_inf) * (-t / tau).exp())
            })
            .collect()
    }

    #[test]
    fn recovers_synthetic_tau() {
        let fit = fit_time_constant(&exp_trace(0.05, 0.02, 0.14, 0.0), Direction::Up).unwrap();
        assert!((fit.tau - 0.05).abs() < 1e-3, "{}", fit.tau);
        assert!(fit.r_squared > 0.999_999);
        assert!(fit.warnings.is_empty());
    }

    #[test]
    fn simulated_spin_down_gives_model_tau() {
        let p = QuadParams::default();
        let mut f = p.channel_max_thrust();
        let mut trace = Vec::new();
        for k in 0..=600 {
            if k % 5 == 0 {
                trace.push((k as f64 * 1e-3, f));
            }
            f = motor_response(f, 0.0, &p, 1e-3);
        }
        let fit = fit_time_constant(&trace, Direction::Down).unwrap();
        assert!((fit.tau - p.tau_down).abs() < 1e-3, "{}", fit.tau);
    }

    #[test]
    fn constant_trace_is_degenerate() {
        let trace: Vec<_> = (0..20).map(|k| (k as f64 * 0.01, 0.1)).collect();
        assert!(matches!(fit_time_constant(&trace, Direction::Up), Err(Error::InsufficientDynamics(_))));
    }

    #[test]
    fn wrong_direction_rejected() {
        let trace = exp_trace(0.16, 0.14, 0.0, 0.0);
        assert!(fit_time_constant(&trace, Direction::Up).is_err());
    }

    #[test]
    fn noise_is_not_a_clean_fit() {
        let trace: Vec<_> = (0..40).map(|k| (k as f64 * 0.01, (k % 2) as f64 + 0.001 * k as f64)).collect();
        for dir in [Direction::Up, Direction::Down] {
            if let Ok(fit) = fit_time_constant(&trace, dir) {
                assert!(!fit.warnings.is_empty());
            }
        }
    }

    proptest! {
        #[test]
        fn shift_invariant(tau in 0.02f64..0.3, shift in -100.0f64..100.0) {
            let a = fit_time_constant(&exp_trace(tau, 0.0, 0.1, 0.0), Direction::Up).unwrap();
            let b = fit_time_constant(&exp_trace(tau, 0.0, 0.1, shift), Direction::Up).unwrap();
            prop_assert!((a.tau - b.tau).abs() < 1e-6 * tau);
        }
    }
}
