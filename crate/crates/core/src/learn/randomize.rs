use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::sim::QuadParams;

/// Per-rollout perturbation of mass and pitch inertia.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainRandomization {
    pub enabled: bool,
    /// kg
    pub sigma_mass: f64,
    /// kg·m²
    pub sigma_inertia: f64,
}

impl Default for DomainRandomization {
    fn default() -> Self {
        Self {
            enabled: true,
            sigma_mass: 0.5e-3,
            sigma_inertia: 1.5e-6,
        }
    }
}

impl DomainRandomization {
    pub fn off() -> Self {
        Self {
            enabled: false,
            sigma_mass: 0.0,
            sigma_inertia: 0.0,
        }
    }
}

/// Normal draw truncated to ±3σ by rejection, then floored at half the base.
fn draw<R: Rng + ?Sized>(rng: &mut R, base: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return base;
    }
    let z = loop {
        let z: f64 = StandardNormal.sample(rng);
        if z.abs() <= 3.0 {
            break z;
        }
    };
    (base + sigma * z).max(0.5 * base)
}

pub fn randomize_inertia<R: Rng + ?Sized>(
    base: &QuadParams,
    rand: &DomainRandomization,
    rng: &mut R,
) -> QuadParams {
    let mut p = *base;
    if rand.enabled {
        p.mass = draw(rng, base.mass, rand.sigma_mass);
        p.inertia_yy = draw(rng, base.inertia_yy, rand.sigma_inertia);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_sigma_is_identity() {
        let base = QuadParams::default();
        let r = DomainRandomization {
            enabled: true,
            sigma_mass: 0.0,
            sigma_inertia: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(randomize_inertia(&base, &r, &mut rng), base);
    }

    #[test]
    fn draws_are_bounded_and_valid() {
        let base = QuadParams::default();
        let r = DomainRandomization::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut sum = 0.0;
        let n = 10_000;
        for _ in 0..n {
            let p = randomize_inertia(&base, &r, &mut rng);
            p.validate().unwrap();
            assert!((p.mass - base.mass).abs() <= 3.0 * r.sigma_mass + 1e-15);
            assert!((p.inertia_yy - base.inertia_yy).abs() <= 3.0 * r.sigma_inertia + 1e-18);
            sum += p.mass;
        }
        assert!((sum / n as f64 - base.mass).abs() / base.mass < 0.01);
    }
}
