//! JSON-lines dataset files and their content hash.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::sweep::{SweepDataset, SweepRow};
use crate::error::{Error, Result};
use crate::learn::learning_curve_csv;

/// One JSON object per row, newline terminated.
pub fn dataset_jsonl(rows: &[SweepRow]) -> Result<String> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&crate::json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical JSON-lines bytes.
pub fn dataset_sha256(rows: &[SweepRow]) -> Result<String> {
    Ok(sha256_hex(dataset_jsonl(rows)?.as_bytes()))
}

pub fn parse_jsonl(text: &str) -> Result<Vec<SweepRow>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            crate::json::from_str(l).map_err(|e| match e {
                Error::Schema { path, message } => Error::Schema {
                    path: format!("line {}: {path}", i + 1),
                    message,
                },
                e => e,
            })
        })
        .collect()
}

pub fn read_dataset(path: &Path) -> Result<Vec<SweepRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound {
            path: path.display().to_string(),
            expected: "sweep dataset (JSON lines)".into(),
        },
        _ => Error::Io(e),
    })?;
    parse_jsonl(&text)
}

/// Write `dataset.jsonl` and `curves/cell_NNNN.csv` under `dir`; returns the dataset hash.
pub fn write_dataset(dir: &Path, data: &SweepDataset) -> Result<String> {
    std::fs::create_dir_all(dir.join("curves"))?;
    let text = dataset_jsonl(&data.rows)?;
    std::fs::write(dir.join("dataset.jsonl"), &text)?;
    for (row, curve) in data.rows.iter().zip(&data.curves) {
        let name = format!("cell_{:04}.csv", row.index);
        std::fs::write(dir.join("curves").join(name), learning_curve_csv(curve))?;
    }
    Ok(sha256_hex(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::{OutcomeHistogram, PolicyParams};
    use crate::sim::ApproachCondition;

    fn row(i: usize, rate: f64) -> SweepRow {
        SweepRow {
            index: i,
            condition: ApproachCondition::new(2.0, 45.0, 3.0).unwrap(),
            repeat: 0,
            seed: 9,
            legs: "Semi-Narrow-Long".into(),
            feasible: true,
            converged: true,
            policy: PolicyParams { tau_cr: 0.2, a_rot: 5.0 },
            trigger: None,
            success_rate: rate,
            suboptimal_rate: 0.0,
            histogram: OutcomeHistogram::default(),
            eval_no_trigger: 0,
            n_rollouts: 30,
        }
    }

    #[test]
    fn jsonl_round_trip_and_stable_hash() {
        let rows = vec![row(0, 0.5), row(1, 0.9)];
        let text = dataset_jsonl(&rows).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(parse_jsonl(&text).unwrap(), rows);
        assert_eq!(dataset_sha256(&rows).unwrap(), dataset_sha256(&rows).unwrap());
        assert_ne!(dataset_sha256(&rows).unwrap(), dataset_sha256(&rows[..1]).unwrap());
    }

    #[test]
    fn bad_line_is_located() {
        let mut text = dataset_jsonl(&[row(0, 0.5)]).unwrap();
        text.push_str("{\"index\":\"x\"}\n");
        match parse_jsonl(&text).unwrap_err() {
            Error::Schema { path, .. } => assert!(path.starts_with("line 2: index"), "{path}"),
            e => panic!("{e}"),
        }
    }
}
