use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::config::LegConfig;
use super::geometry::{foot_body, hull_points, LegSide};
use crate::sim::QuadParams;

/// Range of body pitch at ceiling contact for which a foot arrives strictly
/// before any body or propeller point. Degrees in [0, 360); contains 180°
/// whenever it is not empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactWindow {
    pub bounds: Option<(f64, f64)>,
}

impl ImpactWindow {
    pub fn is_empty(&self) -> bool {
        self.bounds.is_none()
    }

    pub fn width(&self) -> f64 {
        self.bounds.map_or(0.0, |(lo, hi)| hi - lo)
    }

    /// Whether `pitch_deg` (any branch) falls inside the window.
    pub fn contains(&self, pitch_deg: f64) -> bool {
        match self.bounds {
            None => false,
            Some((lo, hi)) => {
                let p = pitch_deg.rem_euclid(360.0);
                p >= lo && p <= hi
            }
        }
    }

    /// `self ⊇ other`.
    pub fn contains_window(&self, other: &ImpactWindow) -> bool {
        match (self.bounds, other.bounds) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some((a, b)), Some((c, d))) => a <= c && b >= d,
        }
    }
}

fn feet_and_hull(legs: &LegConfig, params: &QuadParams) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let feet = [LegSide::Fore, LegSide::Hind]
        .map(|s| foot_body(params, legs, s, 0.0))
        .to_vec();
    let hull = hull_points(params).into_iter().map(|(_, b)| b).collect();
    (feet, hull)
}

fn height(p: [f64; 2], pitch: f64) -> f64 {
    p[0] * pitch.sin() + p[1] * pitch.cos()
}

/// Highest foot minus highest hull point at `pitch` (rad), hinges at rest.
pub fn foot_margin(legs: &LegConfig, params: &QuadParams, pitch: f64) -> f64 {
    let (feet, hull) = feet_and_hull(legs, params);
    margin(&feet, &hull, pitch)
}

fn margin(feet: &[[f64; 2]], hull: &[[f64; 2]], pitch: f64) -> f64 {
    let f = feet
        .iter()
        .map(|&p| height(p, pitch))
        .fold(f64::NEG_INFINITY, f64::max);
    let h = hull
        .iter()
        .map(|&p| height(p, pitch))
        .fold(f64::NEG_INFINITY, f64::max);
    f - h
}

/// The margin can only change sign where some foot and some hull point are
/// level, so the window edges are among those closed-form crossings.
pub fn impact_window(legs: &LegConfig, params: &QuadParams) -> ImpactWindow {
    let (feet, hull) = feet_and_hull(legs, params);
    let mut roots = Vec::new();
    for f in &feet {
        for h in &hull {
            let d = [f[0] - h[0], f[1] - h[1]];
            if d[0].hypot(d[1]) < 1e-15 {
                continue;
            }
            // d_x sin θ + d_z cos θ = 0
            let r = (-d[1]).atan2(d[0]);
            roots.push(r.rem_euclid(TAU));
            roots.push((r + PI).rem_euclid(TAU));
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

    if margin(&feet, &hull, PI) <= 0.0 {
        return ImpactWindow { bounds: None };
    }
    if roots.is_empty() {
        return ImpactWindow {
            bounds: Some((0.0, 360.0)),
        };
    }

    // Walk outward from 180° over crossings that keep the margin positive.
    let below: Vec<f64> = roots.iter().copied().filter(|&r| r < PI).rev().collect();
    let above: Vec<f64> = roots.iter().copied().filter(|&r| r > PI).collect();
    let mut lo = 0.0;
    for (idx, &r) in below.iter().enumerate() {
        let next = below.get(idx + 1).copied().unwrap_or(0.0);
        if margin(&feet, &hull, 0.5 * (r + next)) <= 0.0 {
            lo = r;
            break;
        }
    }
    let mut hi = TAU;
    for (idx, &r) in above.iter().enumerate() {
        let next = above.get(idx + 1).copied().unwrap_or(TAU);
        if margin(&feet, &hull, 0.5 * (r + next)) <= 0.0 {
            hi = r;
            break;
        }
    }
    ImpactWindow {
        bounds: Some((lo.to_degrees(), hi.to_degrees())),
    }
}
