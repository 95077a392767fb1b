//! Learn every cell of the small desk sweep and write the dataset and a polar map.
//!
//! cargo run --release --example desk_sweep -- [out dir]

use std::path::PathBuf;

use perchlab::harness::{aggregate_rows, export_polar_map, run_sweep, write_dataset, SweepSpec};

fn main() -> perchlab::error::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/desk".into()));
    std::fs::create_dir_all(&out)?;
    let spec = SweepSpec::desk();
    let data = run_sweep(&spec, None)?;
    let sha = write_dataset(&out, &data)?;
    let cells = aggregate_rows(&spec, &data.rows);
    export_polar_map(&cells, &out, "polar", "Optimal landing rate")?;
    for c in &cells {
        println!("{:.1} m/s {:>4.0} deg  {:.2}", c.speed, c.angle_deg, c.success_rate);
    }
    println!("{} rows, dataset sha256 {sha}", data.rows.len());
    Ok(())
}
