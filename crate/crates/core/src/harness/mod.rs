//! Grid sweeps over approach conditions, dataset files, policy evaluation
//! grids and polar success maps.

mod dataset;
mod grid;
mod polar;
mod sweep;

pub use dataset::{
    dataset_jsonl, dataset_sha256, parse_jsonl, read_dataset, sha256_hex, write_dataset,
};
pub use grid::{aggregate_rows, evaluate_policy_grid, GridCell, PolarCell};
pub use polar::{export_polar_map, polar_csv, polar_svg, smooth, POLAR_HEADER};
pub use sweep::{
    derive_seed, filter_training_set, run_cells, run_cells_with, run_sweep, with_pool, SweepCell, SweepDataset,
    SweepRow, SweepSpec, ANGLE_RANGE, SPEED_RANGE,
};
