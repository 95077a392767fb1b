//! Per-step rollout telemetry and the compact number format used in CSVs.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sensing::SensoryState;
use crate::sim::QuadState;

pub const TELEMETRY_HEADER: &str =
    "t,x,z,pitch,vx,vz,pitch_rate,thrust_fore,thrust_aft,tau,theta_x,d_ceil";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    pub state: QuadState,
    pub sensed: SensoryState,
}

/// Six significant digits, C `%g` style: fixed or exponent notation by
/// magnitude, trailing zeros removed.
pub fn fmt_g(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..6).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        strip_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn telemetry_csv(rows: &[TelemetryRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 96 + 80);
    out.push_str(TELEMETRY_HEADER);
    out.push('\n');
    for r in rows {
        let s = &r.state;
        let vals = [
            s.t,
            s.x,
            s.z,
            s.pitch,
            s.vx,
            s.vz,
            s.pitch_rate,
            s.thrust_fore,
            s.thrust_aft,
            r.sensed.tau,
            r.sensed.theta_x,
            r.sensed.d_ceil,
        ];
        let line: Vec<String> = vals.iter().map(|&v| fmt_g(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_telemetry(path: &Path, rows: &[TelemetryRow]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(telemetry_csv(rows).as_bytes())?;
    Ok(())
}
