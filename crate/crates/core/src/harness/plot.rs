//! Plot-ready CSV tables aggregated over seeds.
//!
//! | file | columns |
//! |------|---------|
//! | `instantaneous_throughput.csv` | `slot, controller, mean, std` |
//! | `positions.csv` | `controller, seed, slot, entity, x, y` |
//! | `average_throughput.csv` | `duration, controller, mean, std, raw_mean, raw_std` |
//! | `sweep.csv` | `alpha, gamma, epsilon0, controller, mean, std` |
//!
//! `mean`/`std` in the average-throughput table are over throughput only;
//! `raw_*` include boundary penalties.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::output::{mean_std, write_atomic};
use super::{controllers_in_order, RunSummary, SweepRow};
use crate::error::{Error, Result};

/// Number of flight durations in the average-throughput table.
pub const DURATION_POINTS: usize = 10;

/// Writes the plot tables for `runs` (and `sweep`, when non-empty)
/// into `out_dir` and returns the written paths.
pub fn emit_plot_data(
    runs: &[RunSummary],
    sweep: &[SweepRow],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if runs.is_empty() {
        return Err(Error::config("no run summaries to plot"));
    }
    let slots = runs[0].slots();
    if runs.iter().any(|r| r.slots() != slots) {
        return Err(Error::config(
            "runs of different lengths cannot be aggregated",
        ));
    }
    let controllers = controllers_in_order(runs);
    let mut files = Vec::new();

    let mut inst = String::from("slot,controller,mean,std\n");
    for &c in &controllers {
        let of: Vec<&RunSummary> = runs.iter().filter(|r| r.controller == c).collect();
        for n in 0..slots {
            let values: Vec<f64> = of.iter().map(|r| r.throughput[n]).collect();
            let (m, s) = mean_std(&values);
            writeln!(inst, "{},{c},{m},{s}", n + 1).unwrap();
        }
    }
    files.push(emit(out_dir, "instantaneous_throughput.csv", &inst)?);

    let mut pos = String::from("controller,seed,slot,entity,x,y\n");
    for r in runs {
        for p in &r.positions {
            writeln!(
                pos,
                "{},{},{},uav,{},{}",
                r.controller, r.seed, p.slot, p.uav.x, p.uav.y
            )
            .unwrap();
            for (k, u) in p.users.iter().enumerate() {
                writeln!(
                    pos,
                    "{},{},{},user_{},{},{}",
                    r.controller,
                    r.seed,
                    p.slot,
                    k + 1,
                    u.x,
                    u.y
                )
                .unwrap();
            }
        }
    }
    files.push(emit(out_dir, "positions.csv", &pos)?);

    let mut avg = String::from("duration,controller,mean,std,raw_mean,raw_std\n");
    for n in durations(slots) {
        for &c in &controllers {
            let of: Vec<&RunSummary> = runs.iter().filter(|r| r.controller == c).collect();
            let thr: Vec<f64> = of.iter().map(|r| r.average_throughput[n - 1]).collect();
            let raw: Vec<f64> = of.iter().map(|r| r.average_reward[n - 1]).collect();
            let (m, s) = mean_std(&thr);
            let (rm, rs) = mean_std(&raw);
            writeln!(avg, "{n},{c},{m},{s},{rm},{rs}").unwrap();
        }
    }
    files.push(emit(out_dir, "average_throughput.csv", &avg)?);

    if !sweep.is_empty() {
        files.push(write_sweep(sweep, out_dir)?);
    }
    Ok(files)
}

/// Flight durations `k * N / 10` for `k = 1..=10`, deduplicated, at least 1.
pub fn durations(slots: usize) -> Vec<usize> {
    let mut d: Vec<usize> = (1..=DURATION_POINTS)
        .map(|k| (k * slots / DURATION_POINTS).max(1))
        .collect();
    d.dedup();
    d
}

pub fn write_sweep(rows: &[SweepRow], out_dir: &Path) -> Result<PathBuf> {
    let mut out = String::from("alpha,gamma,epsilon0,controller,mean,std\n");
    for row in rows {
        let (m, s) = mean_std(&row.per_seed);
        writeln!(
            out,
            "{},{},{},{},{m},{s}",
            row.alpha, row.gamma, row.epsilon0, row.controller
        )
        .unwrap();
    }
    emit(out_dir, "sweep.csv", &out)
}

fn emit(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    write_atomic(&path, body.as_bytes())?;
    Ok(path)
}
