//! One-class SVM with an RBF kernel, trained by pairwise (SMO) coordinate
//! descent on the dual.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GAMMA: f64 = 2.0;
pub const DEFAULT_NU: f64 = 0.05;
pub const KKT_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OcSvmSettings {
    pub gamma: f64,
    pub nu: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for OcSvmSettings {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
            nu: DEFAULT_NU,
            tolerance: KKT_TOLERANCE,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcSvmModel {
    /// In normalized space.
    pub support_vectors: Vec<[f64; 3]>,
    pub alphas: Vec<f64>,
    pub rho: f64,
    pub gamma: f64,
    pub nu: f64,
}

pub fn rbf(gamma: f64, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2);
    (-gamma * d2).exp()
}

impl OcSvmModel {
    /// Signed distance-like score; non-negative inside the learned region.
    pub fn decision(&self, x: &[f64; 3]) -> f64 {
        let s: f64 = self
            .support_vectors
            .iter()
            .zip(&self.alphas)
            .map(|(sv, a)| a * rbf(self.gamma, sv, x))
            .sum();
        s - self.rho
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.support_vectors.len() != self.alphas.len() || self.alphas.is_empty() {
            return bad("support vectors and alphas must pair up and be non-empty".into());
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return bad(format!("nu must be in (0, 1), got {}", self.nu));
        }
        if !self.rho.is_finite() || self.alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return bad("non-finite or negative dual weights".into());
        }
        Ok(())
    }
}

/// Dual-optimal weights for every training point, before support-vector pruning.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub rho: f64,
    pub upper: f64,
    pub iterations: usize,
    pub violation: f64,
}

/// Solve min ½ αᵀKα subject to 0 ≤ αᵢ ≤ 1/(νn), Σα = 1.
pub fn solve_dual(points: &[[f64; 3]], settings: &OcSvmSettings) -> Result<DualSolution> {
    let n = points.len();
    if n == 0 {
        return Err(Error::InsufficientData("one-class SVM needs training points".into()));
    }
    let OcSvmSettings { gamma, nu, tolerance, max_iterations } = *settings;
    if !(nu > 0.0 && nu < 1.0) || !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma {gamma}, nu {nu}")));
    }
    let upper = 1.0 / (nu * n as f64);
    let k: Vec<Vec<f64>> = points
        .iter()
        .map(|a| points.iter().map(|b| rbf(gamma, a, b)).collect())
        .collect();

    // Feasible start: fill the first points to the bound.
    let mut alpha = vec![0.0; n];
    let mut left: f64 = 1.0;
    for a in alpha.iter_mut() {
        let v = left.min(upper);
        *a = v;
        left -= v;
        if left <= 0.0 {
            break;
        }
    }
    let mut grad: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| k[i][j] * alpha[j]).sum())
        .collect();

    let eps = 1e-12 * upper;
    let mut iterations = 0;
    let violation = loop {
        // Most violating pair: i can grow, j can shrink.
        let mut i_up = None;
        let mut g_min = f64::INFINITY;
        let mut j_low = None;
        let mut g_max = f64::NEG_INFINITY;
        for t in 0..n {
            if alpha[t] < upper - eps && grad[t] < g_min {
                g_min = grad[t];
                i_up = Some(t);
            }
            if alpha[t] > eps && grad[t] > g_max {
                g_max = grad[t];
                j_low = Some(t);
            }
        }
        let (Some(i), Some(j)) = (i_up, j_low) else {
            break 0.0;
        };
        let gap = g_max - g_min;
        if gap <= tolerance {
            break gap.max(0.0);
        }
        if iterations >= max_iterations {
            return Err(Error::SvmNotConverged { iterations, violation: gap });
        }
        iterations += 1;
        let curv = (k[i][i] + k[j][j] - 2.0 * k[i][j]).max(1e-12);
        let delta = (gap / curv).min(upper - alpha[i]).min(alpha[j]);
        alpha[i] += delta;
        alpha[j] -= delta;
        for t in 0..n {
            grad[t] += delta * (k[t][i] - k[t][j]);
        }
    };

    // Clean tiny negatives from round-off.
    for a in &mut alpha {
        if *a < eps {
            *a = 0.0;
        } else if *a > upper - eps {
            *a = upper;
        }
    }
    let rho = offset(&alpha, &grad, upper, eps);
    Ok(DualSolution { alphas: alpha, rho, upper, iterations, violation })
}

fn offset(alpha: &[f64], grad: &[f64], upper: f64, eps: f64) -> f64 {
    let free: Vec<f64> = alpha
        .iter()
        .zip(grad)
        .filter(|(a, _)| **a > eps && **a < upper - eps)
        .map(|(_, g)| *g)
        .collect();
    if !free.is_empty() {
        // Lowest margin value, so every margin vector sits inside the closed region.
        return free.iter().copied().fold(f64::INFINITY, f64::min);
    }
    // No margin vectors: midpoint of the feasible interval.
    let lo = alpha
        .iter()
        .zip(grad)
        .filter(|(a, _)| **a >= upper - eps)
        .map(|(_, g)| *g)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = alpha
        .iter()
        .zip(grad)
        .filter(|(a, _)| **a <= eps)
        .map(|(_, g)| *g)
        .fold(f64::INFINITY, f64::min);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        (false, true) => hi,
        _ => 0.0,
    }
}

/// Train on already-normalized points.
pub fn train_trigger(points: &[[f64; 3]], settings: &OcSvmSettings) -> Result<OcSvmModel> {
    let sol = solve_dual(points, settings)?;
    let mut support_vectors = Vec::new();
    let mut alphas = Vec::new();
    for (p, a) in points.iter().zip(&sol.alphas) {
        if *a > 0.0 {
            support_vectors.push(*p);
            alphas.push(*a);
        }
    }
    Ok(OcSvmModel {
        support_vectors,
        alphas,
        rho: sol.rho,
        gamma: settings.gamma,
        nu: settings.nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn cluster(seed: u64, n: usize) -> Vec<[f64; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut p = [0.0; 3];
                for v in &mut p {
                    *v = StandardNormal.sample(&mut rng);
                }
                p
            })
            .collect()
    }

    #[test]
    fn dual_is_feasible() {
        let pts = cluster(1, 120);
        let s = OcSvmSettings::default();
        let sol = solve_dual(&pts, &s).unwrap();
        let sum: f64 = sol.alphas.iter().sum();
        assert!((sum - 1.0).abs() < 1e-6);
        assert!(sol.alphas.iter().all(|a| *a >= 0.0 && *a <= sol.upper + 1e-15));
        assert!(sol.violation <= s.tolerance);
    }

    #[test]
    fn interior_in_far_out() {
        let pts = cluster(2, 200);
        let m = train_trigger(&pts, &OcSvmSettings::default()).unwrap();
        assert!(m.decision(&[0.0, 0.0, 0.0]) > 0.0);
        let far = [20.0, 0.0, 0.0];
        assert!((m.decision(&far) + m.rho).abs() < 1e-12);
        assert!(m.rho > 0.0);
    }

    #[test]
    fn nu_bounds_outlier_fraction() {
        for seed in 0..10 {
            let pts = cluster(100 + seed, 200);
            // Kernel width on the cluster's own scale; much narrower kernels put
            // every point on the margin and the count becomes round-off.
            let s = OcSvmSettings { nu: 0.1, gamma: 0.1, ..Default::default() };
            let m = train_trigger(&pts, &s).unwrap();
            let out = pts.iter().filter(|p| m.decision(p) < 0.0).count() as f64 / 200.0;
            assert!((0.07..=0.12).contains(&out), "seed {seed}: {out}");
            let sv = m.alphas.len() as f64 / 200.0;
            assert!(sv >= 0.1, "support fraction {sv} below nu");
        }
    }

    #[test]
    fn iteration_cap_reports_violation() {
        let pts = cluster(3, 50);
        let s = OcSvmSettings { max_iterations: 1, ..Default::default() };
        match solve_dual(&pts, &s) {
            Err(Error::SvmNotConverged { violation, .. }) => assert!(violation > s.tolerance),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn permutation_invariant() {
        let pts = cluster(4, 60);
        let m = train_trigger(&pts, &OcSvmSettings::default()).unwrap();
        let mut p = m.clone();
        p.support_vectors.reverse();
        p.alphas.reverse();
        let q = [0.3, -0.2, 0.5];
        assert!((m.decision(&q) - p.decision(&q)).abs() < 1e-12);
    }
}
