//! Re-aggregation of written frame traces.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::link_adaptation::{aggregate, IterationMetrics, MetricsReport};
use crate::{Error, Result};

/// One row of `frames.csv`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct FrameRow {
    pub iteration: usize,
    pub frame: usize,
    /// Empty for the random scheduler.
    pub sector: String,
    pub beam: u32,
    pub cluster: usize,
    pub borrowed: u8,
    pub min_sinr_db: f64,
    pub rate: f64,
    pub loss: u8,
}

pub fn parse_frames_csv(source: &str) -> Result<Vec<FrameRow>> {
    let mut reader = csv::Reader::from_reader(source.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.deserialize::<FrameRow>().enumerate() {
        let row = record.map_err(|e| Error::parse("frame trace", format!("row {}", i + 1), e.to_string()))?;
        if row.borrowed > 1 || row.loss > 1 {
            return Err(Error::parse("frame trace", format!("row {}", i + 1), "flags must be 0 or 1"));
        }
        if !row.rate.is_finite() || row.rate < 0.0 {
            return Err(Error::parse("frame trace", format!("row {}", i + 1), "rate must be finite and non-negative"));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Rebuild the metrics from the trace rows, summing in the same order as the
/// live run so the result is bit-identical.
pub fn reaggregate(rows: &[FrameRow]) -> Result<MetricsReport> {
    let mut frames: BTreeMap<(usize, usize), (f64, usize, bool)> = BTreeMap::new();
    for r in rows {
        let f = frames.entry((r.iteration, r.frame)).or_insert((0.0, 0, false));
        f.0 += r.rate;
        f.1 += 1;
        f.2 |= r.loss == 1;
    }
    let mut iterations: BTreeMap<usize, IterationMetrics> = BTreeMap::new();
    for ((iteration, _), (sum, count, loss)) in frames {
        let m = iterations.entry(iteration).or_default();
        m.rate_sum += sum;
        m.rate_count += count;
        m.frames += 1;
        m.loss_frames += usize::from(loss);
    }
    aggregate(&iterations.into_values().collect::<Vec<_>>())
}

/// Re-aggregate every `cells/*/frames.csv` under a run directory, in cell
/// name order.
pub fn reaggregate_dir(root: &Path) -> Result<Vec<(String, MetricsReport)>> {
    let cells = root.join("cells");
    let mut names: Vec<String> = std::fs::read_dir(&cells)
        .map_err(|e| Error::io(&cells, e))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().join("frames.csv").is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(Error::validation("report", format!("no frame traces under {}", cells.display())));
    }
    names
        .into_iter()
        .map(|name| {
            let path = cells.join(&name).join("frames.csv");
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            Ok((name, reaggregate(&parse_frames_csv(&text)?)?))
        })
        .collect()
}
