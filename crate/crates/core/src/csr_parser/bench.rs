//! Timing harness comparing the fast loader with the per-submodel baseline.
//!
//! Each path is run once untimed, then timed `runs` times around the whole
//! operation with a monotonic clock; the mean is reported. The OS page cache
//! is not controlled, so after the warm-up both paths read from memory.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::DatasetDir;
use crate::error::{Error, Result};

pub const DEFAULT_RUNS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    /// `nodes x timesteps`.
    pub n: u64,
    pub fast_seconds: f64,
    pub baseline_seconds: f64,
    pub bytes_read_fast: u64,
    pub bytes_read_baseline: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub runs: usize,
    pub records: Vec<BenchRecord>,
}

impl BenchReport {
    pub fn fast_slope(&self) -> Option<f64> {
        log_log_slope(self.records.iter().map(|r| (r.n as f64, r.fast_seconds)))
    }

    pub fn baseline_slope(&self) -> Option<f64> {
        log_log_slope(self.records.iter().map(|r| (r.n as f64, r.baseline_seconds)))
    }

    /// `baseline_seconds / fast_seconds` per record.
    pub fn ratios(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| r.baseline_seconds / r.fast_seconds)
            .collect()
    }
}

/// Least-squares slope of `ln y` against `ln x`. `None` with fewer than two
/// distinct x values or any non-positive coordinate.
pub fn log_log_slope(points: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.into_iter().collect();
    if pts.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Times loading every submodel's temperatures both ways.
pub fn bench_compare(dir: &Path, runs: usize) -> Result<BenchReport> {
    Ok(BenchReport {
        runs,
        records: vec![bench_record(dir, runs)?],
    })
}

/// [`bench_compare`] over several datasets, one record each.
pub fn bench_ladder<P: AsRef<Path>>(dirs: &[P], runs: usize) -> Result<BenchReport> {
    let records = dirs
        .iter()
        .map(|d| bench_record(d.as_ref(), runs))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport { runs, records })
}

fn bench_record(dir: &Path, runs: usize) -> Result<BenchRecord> {
    if runs == 0 {
        return Err(Error::Validation("bench needs at least one run".into()));
    }
    let probe = DatasetDir::new(dir);
    let sizes = probe.read_sizes()?;
    let names: Vec<String> = probe.parse_node_tree_fast()?.names().map(str::to_owned).collect();

    let time = |f: &dyn Fn(&DatasetDir) -> Result<usize>| -> Result<(f64, u64)> {
        f(&DatasetDir::new(dir))?;
        let mut total = 0.0;
        let mut bytes = 0;
        for _ in 0..runs {
            let ds = DatasetDir::new(dir);
            let start = Instant::now();
            let loaded = f(&ds)?;
            total += start.elapsed().as_secs_f64();
            std::hint::black_box(loaded);
            bytes = ds.stats().total();
        }
        Ok((total / runs as f64, bytes))
    };

    let (fast_seconds, bytes_read_fast) = time(&|ds| Ok(ds.load_submodel_temperatures(&names)?.len()))?;
    let (baseline_seconds, bytes_read_baseline) = time(&|ds| Ok(ds.baseline_load_like_opentd(&names)?.len()))?;

    Ok(BenchRecord {
        n: (sizes.num_nodes as u64) * (sizes.num_timesteps as u64),
        fast_seconds,
        baseline_seconds,
        bytes_read_fast,
        bytes_read_baseline,
    })
}
