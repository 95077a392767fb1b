use serde::{Deserialize, Serialize};

use super::{linear_fit, minimize_log_scale};
use crate::error::{Error, Result};

/// Region boundary (grams-force).
pub const SPLIT_GF: f64 = 5.0;
pub const PWM_MAX: f64 = 65535.0;
const MIN_REGION_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogForm {
    /// `a ln(b f) + c`
    Scaled,
    /// `a ln(f − b) + c`
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogCurve {
    pub form: LogForm,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LogCurve {
    fn argument(&self, f: f64) -> f64 {
        match self.form {
            LogForm::Scaled => self.b * f,
            LogForm::Shifted => f - self.b,
        }
    }

    /// Motor voltage for thrust `f` (gf), or `None` where the log argument is not positive.
    pub fn voltage(&self, f: f64) -> Option<f64> {
        let arg = self.argument(f);
        (arg > 0.0).then(|| self.a * arg.ln() + self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryCompParams {
    /// Thrust at or below `split_gf`.
    pub low: LogCurve,
    pub high: LogCurve,
    pub split_gf: f64,
    pub pwm_max: f64,
}

impl BatteryCompParams {
    pub fn stock() -> Self {
        Self::from_table([0.618, 1.394, 0.0], [2.097, -4.464, 5.636])
    }

    pub fn upgraded() -> Self {
        Self::from_table([1.285, 1.512, 0.0], [3.230, -5.469, 5.979])
    }

    pub fn from_table(low: [f64; 3], high: [f64; 3]) -> Self {
        Self {
            low: LogCurve { form: LogForm::Scaled, a: low[0], b: low[1], c: low[2] },
            high: LogCurve { form: LogForm::Shifted, a: high[0], b: high[1], c: high[2] },
            split_gf: SPLIT_GF,
            pwm_max: PWM_MAX,
        }
    }

    pub fn curve(&self, thrust_gf: f64) -> &LogCurve {
        if thrust_gf <= self.split_gf {
            &self.low
        } else {
            &self.high
        }
    }

    pub fn voltage(&self, thrust_gf: f64) -> Option<f64> {
        self.curve(thrust_gf).voltage(thrust_gf)
    }

    /// Jump between the two curves at the region boundary (V).
    pub fn discontinuity(&self) -> Option<f64> {
        Some(self.high.voltage(self.split_gf)? - self.low.voltage(self.split_gf)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionFit {
    pub n: usize,
    pub residual_rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryFit {
    pub params: BatteryCompParams,
    pub low: RegionFit,
    pub high: RegionFit,
    pub discontinuity: Option<f64>,
}

/// Fit both regions to `(thrust_gf, v_motor)` samples.
pub fn fit_thrust_voltage(samples: &[(f64, f64)]) -> Result<BatteryFit> {
    if samples.iter().any(|(f, v)| !f.is_finite() || !v.is_finite()) {
        return Err(Error::Parse("thrust/voltage samples contain non-finite values".into()));
    }
    let (low, high): (Vec<_>, Vec<_>) = samples.iter().copied().partition(|&(f, _)| f <= SPLIT_GF);
    for (name, region) in [("thrust <= 5 gf", &low), ("thrust > 5 gf", &high)] {
        if region.len() < MIN_REGION_SAMPLES {
            return Err(Error::InsufficientData(format!(
                "region {name} has {} samples, need at least {MIN_REGION_SAMPLES}",
                region.len()
            )));
        }
    }
    let (low_curve, low_fit) = fit_scaled(&low)?;
    let (high_curve, high_fit) = fit_shifted(&high)?;
    let params = BatteryCompParams {
        low: low_curve,
        high: high_curve,
        split_gf: SPLIT_GF,
        pwm_max: PWM_MAX,
    };
    Ok(BatteryFit {
        params,
        low: low_fit,
        high: high_fit,
        discontinuity: params.discontinuity(),
    })
}

/// `a ln(b f)` with `c = 0`, which is linear in `ln f`.
fn fit_scaled(s: &[(f64, f64)]) -> Result<(LogCurve, RegionFit)> {
    if let Some(&(f, _)) = s.iter().find(|(f, _)| *f <= 0.0) {
        return Err(Error::RegionForm(format!("ln(b·f) needs positive thrust, got {f} gf")));
    }
    let xs: Vec<f64> = s.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = s.iter().map(|p| p.1).collect();
    let (a, icpt, sse) = linear_fit(&xs, &ys)
        .ok_or_else(|| Error::RegionForm("low region thrust samples do not vary".into()))?;
    check_slope(a, "low")?;
    let curve = LogCurve { form: LogForm::Scaled, a, b: (icpt / a).exp(), c: 0.0 };
    Ok((curve, RegionFit { n: s.len(), residual_rms: (sse / s.len() as f64).sqrt() }))
}

/// `a ln(f − b) + c`, profiling the shift `b` below the smallest thrust.
fn fit_shifted(s: &[(f64, f64)]) -> Result<(LogCurve, RegionFit)> {
    let fmin = s.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let fmax = s.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let span = fmax - fmin;
    if span <= 0.0 {
        return Err(Error::RegionForm("high region thrust samples do not vary".into()));
    }
    let ys: Vec<f64> = s.iter().map(|p| p.1).collect();
    let sse_at = |gap: f64| -> f64 {
        let b = fmin - gap;
        let xs: Vec<f64> = s.iter().map(|p| (p.0 - b).ln()).collect();
        linear_fit(&xs, &ys).map_or(f64::INFINITY, |r| r.2)
    };
    let gap = minimize_log_scale(sse_at, span * 1e-4, span * 1e4);
    let b = fmin - gap;
    let xs: Vec<f64> = s.iter().map(|p| (p.0 - b).ln()).collect();
    let (a, c, sse) = linear_fit(&xs, &ys).expect("profile minimum is finite");
    check_slope(a, "high")?;
    let curve = LogCurve { form: LogForm::Shifted, a, b, c };
    Ok((curve, RegionFit { n: s.len(), residual_rms: (sse / s.len() as f64).sqrt() }))
}

fn check_slope(a: f64, region: &str) -> Result<()> {
    if a > 0.0 {
        Ok(())
    } else {
        Err(Error::RegionForm(format!(
            "{region} region voltage does not increase with thrust (a = {a:.4})"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PwmCommand {
    pub pwm: f64,
    pub v_motor: f64,
    pub clamped: bool,
}

impl PwmCommand {
    pub fn counts(&self) -> u32 {
        self.pwm.round() as u32
    }
}

/// PWM duty that delivers the voltage required for `thrust_gf` from the present battery voltage.
pub fn compensate_pwm(params: &BatteryCompParams, thrust_gf: f64, v_battery: f64) -> Result<PwmCommand> {
    if !(v_battery.is_finite() && v_battery > 0.0) {
        return Err(Error::InvalidParameter(format!("battery voltage must be positive, got {v_battery}")));
    }
    // Below the curve's domain no voltage is needed.
    let v_motor = params.voltage(thrust_gf).unwrap_or(0.0);
    Ok(pwm_for_voltage(v_motor, v_battery, params.pwm_max))
}

pub fn pwm_for_voltage(v_motor: f64, v_battery: f64, pwm_max: f64) -> PwmCommand {
    let raw = v_motor / v_battery * pwm_max;
    let pwm = raw.clamp(0.0, pwm_max);
    PwmCommand { pwm, v_motor, clamped: pwm != raw }
}

/// Motor voltage seen during a thrust-stand sample.
pub fn motor_voltage(v_onboard: f64, pwm: f64, pwm_max: f64) -> f64 {
    v_onboard * pwm / pwm_max
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn synth(p: &BatteryCompParams) -> Vec<(f64, f64)> {
        let mut s = Vec::new();
        for k in 0..12 {
            let f = 0.8 + 4.2 * k as f64 / 11.0;
            s.push((f, p.voltage(f).unwrap()));
        }
        for k in 1..=14 {
            let f = 5.0 + 11.0 * k as f64 / 14.0;
            s.push((f, p.voltage(f).unwrap()));
        }
        s
    }

    #[test]
    fn round_trip_recovers_parameters() {
        for truth in [BatteryCompParams::stock(), BatteryCompParams::upgraded()] {
            let fit = fit_thrust_voltage(&synth(&truth)).unwrap();
            for (got, want) in [(fit.params.low, truth.low), (fit.params.high, truth.high)] {
                assert_relative_eq!(got.a, want.a, max_relative = 0.01);
                assert_relative_eq!(got.b, want.b, max_relative = 0.01);
                assert!((got.c - want.c).abs() <= 0.01 * want.c.abs().max(1e-9) + 1e-9, "{got:?}");
            }
            assert!(fit.low.residual_rms < 1e-9);
            assert!(fit.high.residual_rms < 1e-9);
        }
    }

    #[test]
    fn decreasing_samples_rejected() {
        let truth = BatteryCompParams::stock();
        let s: Vec<_> = synth(&truth).into_iter().map(|(f, v)| (f, -v)).collect();
        assert!(matches!(fit_thrust_voltage(&s), Err(Error::RegionForm(_))));
    }

    #[test]
    fn non_positive_thrust_rejected() {
        let mut s = synth(&BatteryCompParams::stock());
        s[0].0 = 0.0;
        assert!(matches!(fit_thrust_voltage(&s), Err(Error::RegionForm(_))));
    }

    #[test]
    fn too_few_samples() {
        let s = synth(&BatteryCompParams::stock());
        assert!(matches!(fit_thrust_voltage(&s[..15]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn pwm_proportional_and_clamped() {
        let full = pwm_for_voltage(3.7, 3.7, PWM_MAX);
        assert_eq!(full.pwm, PWM_MAX);
        assert!(!full.clamped);
        assert_eq!(pwm_for_voltage(1.85, 3.7, PWM_MAX).pwm, PWM_MAX / 2.0);
        let sat = pwm_for_voltage(4.2, 3.7, PWM_MAX);
        assert_eq!(sat.pwm, PWM_MAX);
        assert!(sat.clamped);
    }

    #[test]
    fn table_curves_increase_within_regions() {
        for p in [BatteryCompParams::stock(), BatteryCompParams::upgraded()] {
            for (lo, hi) in [(0.1, 5.0), (5.01, 16.0)] {
                let vs: Vec<f64> = (0..=50).map(|k| p.voltage(lo + (hi - lo) * k as f64 / 50.0).unwrap()).collect();
                assert!(vs.windows(2).all(|w| w[1] > w[0]));
            }
        }
    }

    proptest! {
        #[test]
        fn pwm_non_increasing_in_battery_voltage(thrust in 0.5f64..15.0, v1 in 2.5f64..4.5, dv in 0.0f64..1.0) {
            let p = BatteryCompParams::stock();
            let a = compensate_pwm(&p, thrust, v1).unwrap();
            let b = compensate_pwm(&p, thrust, v1 + dv).unwrap();
            prop_assert!(b.pwm <= a.pwm);
        }
    }
}
