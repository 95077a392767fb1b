use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensing::SensoryState;

/// Policy input vector (τ, |ϑx|, D_ceil).
///
/// Approach direction is folded away: a mirrored approach sees the same input.
pub fn policy_features(s: &SensoryState) -> [f64; 3] {
    [s.tau, s.theta_x.abs(), s.d_ceil]
}

/// Per-feature standardization shared by the trigger and action models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl Normalizer {
    /// Population mean and standard deviation. A constant feature keeps unit scale.
    pub fn fit(points: &[[f64; 3]]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientData("normalizer needs at least one point".into()));
        }
        let n = points.len() as f64;
        let mut mean = [0.0; 3];
        for p in points {
            for k in 0..3 {
                mean[k] += p[k] / n;
            }
        }
        let mut std = [0.0; 3];
        for p in points {
            for k in 0..3 {
                std[k] += (p[k] - mean[k]).powi(2) / n;
            }
        }
        for s in &mut std {
            *s = s.sqrt();
            if *s < 1e-12 {
                *s = 1.0;
            }
        }
        Ok(Self { mean, std })
    }

    pub fn apply(&self, x: &[f64; 3]) -> [f64; 3] {
        [
            (x[0] - self.mean[0]) / self.std[0],
            (x[1] - self.mean[1]) / self.std[1],
            (x[2] - self.mean[2]) / self.std[2],
        ]
    }

    pub fn state(&self, s: &SensoryState) -> [f64; 3] {
        self.apply(&policy_features(s))
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.std.iter().all(|s| s.is_finite() && *s > 0.0)
            && self.mean.iter().all(|m| m.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad normalizer {self:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardizes_to_zero_mean_unit_variance() {
        let pts = [[1.0, 2.0, 5.0], [3.0, 2.0, 7.0], [5.0, 2.0, 9.0]];
        let n = Normalizer::fit(&pts).unwrap();
        let z: Vec<_> = pts.iter().map(|p| n.apply(p)).collect();
        let m0: f64 = z.iter().map(|v| v[0]).sum::<f64>() / 3.0;
        let v0: f64 = z.iter().map(|v| v[0] * v[0]).sum::<f64>() / 3.0;
        assert!(m0.abs() < 1e-12);
        assert!((v0 - 1.0).abs() < 1e-12);
        // constant column
        assert_eq!(n.std[1], 1.0);
        assert_eq!(z[0][1], 0.0);
    }

    #[test]
    fn mirrored_approach_is_same_input() {
        let a = SensoryState { tau: 0.2, theta_x: 1.5, d_ceil: 0.4, stamp: 0.0 };
        let b = SensoryState { theta_x: -1.5, ..a };
        assert_eq!(policy_features(&a), policy_features(&b));
    }
}
