//! Polar success maps: raw CSV plus an SVG heat map (radius = speed,
//! angle = flight angle). Smoothing happens only in the SVG.

use std::fmt::Write as _;
use std::path::Path;

use super::grid::PolarCell;
use crate::error::Result;
use crate::telemetry::fmt_g;

pub const POLAR_HEADER: &str = "speed,angle_deg,success_rate,suboptimal_rate,n";

pub fn polar_csv(cells: &[PolarCell]) -> String {
    let mut out = String::from(POLAR_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_g(c.speed),
            fmt_g(c.angle_deg),
            fmt_g(c.success_rate),
            fmt_g(c.suboptimal_rate),
            c.n
        );
    }
    out
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn spacing(v: &[f64], fallback: f64) -> f64 {
    let s = v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if s.is_finite() && s > 0.0 {
        s
    } else {
        fallback
    }
}

/// 3×3 neighbourhood mean over the (speed, angle) lattice, skipping holes.
pub fn smooth(cells: &[PolarCell]) -> Vec<f64> {
    let speeds = sorted_unique(cells.iter().map(|c| c.speed).collect());
    let angles = sorted_unique(cells.iter().map(|c| c.angle_deg).collect());
    let pos = |c: &PolarCell| {
        let i = speeds.iter().position(|s| *s == c.speed).unwrap() as i64;
        let j = angles.iter().position(|a| *a == c.angle_deg).unwrap() as i64;
        (i, j)
    };
    let idx: Vec<(i64, i64)> = cells.iter().map(pos).collect();
    cells
        .iter()
        .zip(&idx)
        .map(|(_, &(i, j))| {
            let (mut sum, mut n) = (0.0, 0);
            for (c, &(ci, cj)) in cells.iter().zip(&idx) {
                if (ci - i).abs() <= 1 && (cj - j).abs() <= 1 {
                    sum += c.success_rate;
                    n += 1;
                }
            }
            sum / n as f64
        })
        .collect()
}

/// Five-stop dark-blue → yellow ramp.
fn color(v: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let x = v.clamp(0.0, 1.0) * 4.0;
    let k = (x.floor() as usize).min(3);
    let f = x - k as f64;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

const W: f64 = 700.0;
const H: f64 = 400.0;
const CX: f64 = 350.0;
const CY: f64 = 360.0;
const R0: f64 = 40.0;
const R1: f64 = 300.0;

fn pt(r: f64, deg: f64) -> (f64, f64) {
    let a = deg.to_radians();
    (CX + r * a.cos(), CY - r * a.sin())
}

pub fn polar_svg(cells: &[PolarCell], title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, "<desc>smoothing: 3x3 neighbourhood mean at render time; CSV holds raw rates</desc>");
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{CX}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        xml_escape(title)
    );
    if !cells.is_empty() {
        let speeds = sorted_unique(cells.iter().map(|c| c.speed).collect());
        let angles = sorted_unique(cells.iter().map(|c| c.angle_deg).collect());
        let ds = spacing(&speeds, 0.25);
        let da = spacing(&angles, 7.5);
        let (lo, hi) = (speeds[0] - ds / 2.0, speeds[speeds.len() - 1] + ds / 2.0);
        let radius = |v: f64| R0 + (v - lo) / (hi - lo) * (R1 - R0);
        let sm = smooth(cells);
        for (c, v) in cells.iter().zip(&sm) {
            let (r_in, r_out) = (radius(c.speed - ds / 2.0), radius(c.speed + ds / 2.0));
            let (a0, a1) = (c.angle_deg - da / 2.0, c.angle_deg + da / 2.0);
            let p = [pt(r_out, a0), pt(r_out, a1), pt(r_in, a1), pt(r_in, a0)];
            let _ = writeln!(
                s,
                r#"<path d="M{:.2},{:.2} A{r_out:.2},{r_out:.2} 0 0 0 {:.2},{:.2} L{:.2},{:.2} A{r_in:.2},{r_in:.2} 0 0 1 {:.2},{:.2} Z" fill="{}"/>"#,
                p[0].0, p[0].1, p[1].0, p[1].1, p[2].0, p[2].1, p[3].0, p[3].1,
                color(*v)
            );
        }
        for &sp in &speeds {
            let (x, y) = pt(radius(sp), 0.0);
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
                y + 16.0,
                fmt_g(sp)
            );
        }
        for &an in &angles {
            let (x, y) = pt(R1 + 14.0, an);
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{y:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">{}°</text>"#,
                fmt_g(an)
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<line x1="{CX}" y1="{CY}" x2="{:.2}" y2="{CY}" stroke="black"/>"#,
        CX + R1
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">speed (m/s)</text>"#,
        CX + 0.5 * (R0 + R1),
        CY + 34.0
    );
    s.push_str("</svg>\n");
    s
}

fn xml_escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Write `<stem>.csv` and `<stem>.svg`.
pub fn export_polar_map(cells: &[PolarCell], dir: &Path, stem: &str, title: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{stem}.csv")), polar_csv(cells))?;
    std::fs::write(dir.join(format!("{stem}.svg")), polar_svg(cells, title))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(speed: f64, angle: f64, rate: f64) -> PolarCell {
        PolarCell { speed, angle_deg: angle, success_rate: rate, suboptimal_rate: 0.0, n: 10 }
    }

    #[test]
    fn empty_grid() {
        assert_eq!(polar_csv(&[]), format!("{POLAR_HEADER}\n"));
        let svg = polar_svg(&[], "empty");
        assert!(svg.starts_with("<svg") && !svg.contains("<path"));
    }

    #[test]
    fn row_count_and_determinism() {
        let cells: Vec<_> = (0..3)
            .flat_map(|i| (0..4).map(move |j| cell(1.5 + i as f64, 30.0 + 15.0 * j as f64, 0.1 * (i + j) as f64)))
            .collect();
        let csv = polar_csv(&cells);
        assert_eq!(csv.lines().count(), cells.len() + 1);
        assert_eq!(polar_svg(&cells, "t"), polar_svg(&cells, "t"));
        assert_eq!(polar_svg(&cells, "t").matches("<path").count(), cells.len());
    }

    #[test]
    fn smoothing_is_local_mean() {
        let cells = vec![cell(1.0, 30.0, 1.0), cell(1.0, 45.0, 0.0), cell(2.0, 30.0, 0.0), cell(3.0, 90.0, 0.5)];
        let sm = smooth(&cells);
        assert!((sm[0] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(sm[3], 0.5);
        // raw data untouched
        assert_eq!(cells[0].success_rate, 1.0);
    }
}
