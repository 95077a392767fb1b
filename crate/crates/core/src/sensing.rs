//! Emulated optical-flow cues: time-to-contact τ, transverse flow ϑx and the
//! ceiling distance, sampled at 100 Hz and held between ticks.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::sim::QuadState;

pub const VZ_MIN: f64 = 0.01;
pub const D_MIN: f64 = 0.01;
pub const TAU_CLAMP: f64 = 5.0;
pub const SENSOR_RATE_HZ: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensoryState {
    /// s
    pub tau: f64,
    /// 1/s
    pub theta_x: f64,
    /// m
    pub d_ceil: f64,
    pub stamp: f64,
}

impl SensoryState {
    /// Policy input order: (τ, ϑx, D_ceil).
    pub fn features(&self) -> [f64; 3] {
        [self.tau, self.theta_x, self.d_ceil]
    }
}

pub fn sense(state: &QuadState, ceiling_z: f64) -> SensoryState {
    let d_ceil = (ceiling_z - state.z).max(0.0);
    let tau = (d_ceil / state.vz.max(VZ_MIN)).min(TAU_CLAMP);
    SensoryState {
        tau: tau.max(f64::MIN_POSITIVE),
        theta_x: state.vx / d_ceil.max(D_MIN),
        d_ceil,
        stamp: state.t,
    }
}

/// Per-channel Gaussian noise σ; zero by default.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorNoise {
    pub tau: f64,
    pub theta_x: f64,
    pub d_ceil: f64,
}

impl SensorNoise {
    pub fn is_zero(&self) -> bool {
        self.tau == 0.0 && self.theta_x == 0.0 && self.d_ceil == 0.0
    }
}

/// Sample-and-hold sensor. Ticks fall on integer multiples of the period.
#[derive(Debug, Clone)]
pub struct Sensor {
    pub noise: SensorNoise,
    period: f64,
    last_tick: Option<i64>,
    held: Option<SensoryState>,
}

impl Default for Sensor {
    fn default() -> Self {
        Self::new(SensorNoise::default())
    }
}

impl Sensor {
    pub fn new(noise: SensorNoise) -> Self {
        Self {
            noise,
            period: 1.0 / SENSOR_RATE_HZ,
            last_tick: None,
            held: None,
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Returns the held reading and whether it was refreshed this call.
    pub fn observe<R: Rng + ?Sized>(
        &mut self,
        state: &QuadState,
        ceiling_z: f64,
        rng: &mut R,
    ) -> (SensoryState, bool) {
        let tick = (state.t / self.period + 1e-6).floor() as i64;
        if let (Some(last), Some(held)) = (self.last_tick, self.held) {
            if tick == last {
                return (held, false);
            }
        }
        let mut s = sense(state, ceiling_z);
        s.stamp = tick as f64 * self.period;
        if !self.noise.is_zero() {
            s.tau = (s.tau + gauss(rng, self.noise.tau)).clamp(1e-6, TAU_CLAMP);
            s.theta_x += gauss(rng, self.noise.theta_x);
            s.d_ceil = (s.d_ceil + gauss(rng, self.noise.d_ceil)).max(0.0);
        }
        self.last_tick = Some(tick);
        self.held = Some(s);
        (s, true)
    }
}

fn gauss<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn at(z: f64, vx: f64, vz: f64) -> QuadState {
        let mut s = QuadState::at_rest(0.0, z);
        s.vx = vx;
        s.vz = vz;
        s
    }

    #[test]
    fn closed_form_values() {
        let s = sense(&at(1.5, 1.0, 2.5), 2.0);
        assert!((s.tau - 0.2).abs() < 1e-12);
        assert!((s.theta_x - 2.0).abs() < 1e-12);
        assert!((s.d_ceil - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hover_clamps_tau() {
        assert_eq!(sense(&at(1.0, 0.0, 0.0), 2.0).tau, TAU_CLAMP);
    }

    #[test]
    fn scale_consistency() {
        let a = sense(&at(1.5, 1.0, 2.0), 2.0);
        let b = sense(&at(1.0, 1.0, 4.0), 2.0);
        assert!((a.tau - b.tau).abs() < 1e-12);
        let c = sense(&at(1.5, 2.0, 2.0), 2.0);
        assert!((c.theta_x - 2.0 * a.theta_x).abs() < 1e-12);
    }

    #[test]
    fn held_between_ticks() {
        let mut sensor = Sensor::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = at(0.0, 1.0, 2.0);
        let mut refreshes = Vec::new();
        let mut prev = None;
        for k in 0..100 {
            s.t = k as f64 * 1e-3;
            s.z = 2.0 * s.t;
            let (r, fresh) = sensor.observe(&s, 2.0, &mut rng);
            if fresh {
                refreshes.push(k);
            } else {
                assert_eq!(Some(r), prev);
            }
            prev = Some(r);
        }
        assert_eq!(refreshes, (0..10).map(|i| i * 10).collect::<Vec<_>>());
    }
}
