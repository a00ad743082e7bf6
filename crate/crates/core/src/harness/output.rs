//! CSV writers and the write-once file helper.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::qlearn::EpisodeTrace;

/// Writes `contents` to `path` through a sibling temp file and a rename, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn trace_header(num_users: usize) -> String {
    let mut h = String::from("slot,cell_i,cell_j,action,reward,running_avg");
    for k in 1..=num_users {
        write!(h, ",d_{k},h_{k},los_{k},x_{k},y_{k}").unwrap();
    }
    h
}

/// Trace CSV: `slot, cell_i, cell_j, action, reward, running_avg`, then for
/// every user `d_k, h_k, los_k, x_k, y_k`.
pub fn trace_csv(trace: &EpisodeTrace) -> String {
    let users = trace.records.first().map_or(0, |r| r.links.len());
    let mut out = trace_header(users);
    out.push('\n');
    for r in &trace.records {
        write!(
            out,
            "{},{},{},{},{},{}",
            r.slot, r.cell.i, r.cell.j, r.action, r.reward, r.running_avg
        )
        .unwrap();
        for (link, pos) in r.links.iter().zip(&r.positions) {
            write!(
                out,
                ",{},{},{},{},{}",
                link.distance,
                link.gain,
                u8::from(link.condition.is_los()),
                pos.x,
                pos.y
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}
