use std::fs;
use std::path::Path;

use uavnoma::channel::LosModel;
use uavnoma::harness::output::mean_std;
use uavnoma::harness::{
    run_experiment, run_sweep, warm_start_for, ControllerKind, Execution, Experiment,
};
use uavnoma::Error;

fn small(dir: &Path) -> Experiment {
    let mut exp = Experiment::default_experiment();
    exp.output_dir = dir.to_path_buf();
    exp.slots = 60;
    exp.surrogate.budget_episodes = 100;
    exp
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn single_run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut exp = small(dir.path());
    exp.controllers = vec![ControllerKind::Rl];
    exp.seeds = vec![3];
    exp.slots = 10;
    let report = run_experiment(&exp, Execution::Sequential).unwrap();
    assert_eq!(report.runs.len(), 1);

    let (header, rows) = csv_rows(&dir.path().join("traces/rl_seed3.csv"));
    assert_eq!(
        &header[..6],
        [
            "slot",
            "cell_i",
            "cell_j",
            "action",
            "reward",
            "running_avg"
        ]
    );
    assert_eq!(header.len(), 6 + 5 * exp.scenario.num_users());
    assert_eq!(rows.len(), 10);
    let (_, summary) = csv_rows(&dir.path().join("summary.csv"));
    assert_eq!(summary.len(), 1);
    assert_eq!(summary[0][0], "rl");
    for file in report.files {
        assert!(file.exists(), "{}", file.display());
    }
}

#[test]
fn running_average_is_prefix_mean() {
    let dir = tempfile::tempdir().unwrap();
    let mut exp = small(dir.path());
    exp.seeds = vec![1];
    exp.slots = 300;
    run_experiment(&exp, Execution::Parallel).unwrap();
    for c in ControllerKind::ALL {
        let (_, rows) = csv_rows(&exp.trace_path(c, 1));
        let mut sum = 0.0;
        for (n, row) in rows.iter().enumerate() {
            assert_eq!(row[0].parse::<usize>().unwrap(), n + 1);
            sum += row[4].parse::<f64>().unwrap();
            let avg: f64 = row[5].parse().unwrap();
            assert!(
                (avg - sum / (n + 1) as f64).abs() <= 1e-12,
                "{c} slot {}",
                n + 1
            );
        }
    }
}

#[test]
fn thirty_runs_and_exact_aggregation() {
    let dir = tempfile::tempdir().unwrap();
    let mut exp = small(dir.path());
    exp.controllers = vec![
        ControllerKind::Rl,
        ControllerKind::ErlPlos,
        ControllerKind::Heuristic,
    ];
    exp.seeds = (0..10).collect();
    let report = run_experiment(&exp, Execution::Parallel).unwrap();
    assert_eq!(report.runs.len(), 30);

    let (header, summary) = csv_rows(&dir.path().join("summary.csv"));
    assert_eq!(summary.len(), 30);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (_, aggregate) = csv_rows(&dir.path().join("aggregate.csv"));
    assert_eq!(aggregate.len(), 3);
    for row in aggregate {
        let per_seed: Vec<f64> = summary
            .iter()
            .filter(|s| s[0] == row[0])
            .map(|s| s[col("final_avg_throughput")].parse().unwrap())
            .collect();
        assert_eq!(per_seed.len(), 10);
        let n = per_seed.len() as f64;
        let mean = per_seed.iter().sum::<f64>() / n;
        let std = (per_seed.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert_eq!(row[2].parse::<f64>().unwrap(), mean);
        assert_eq!(row[3].parse::<f64>().unwrap(), std);
    }
}

#[test]
fn plot_tables_have_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let mut exp = small(dir.path());
    exp.seeds = vec![0, 1, 2];
    exp.slots = 100;
    let report = run_experiment(&exp, Execution::Sequential).unwrap();

    let (header, rows) = csv_rows(&dir.path().join("average_throughput.csv"));
    assert_eq!(
        header,
        [
            "duration",
            "controller",
            "mean",
            "std",
            "raw_mean",
            "raw_std"
        ]
    );
    assert_eq!(rows.len(), 10 * 4);
    let last = rows.iter().find(|r| r[0] == "100" && r[1] == "rl").unwrap();
    let finals: Vec<f64> = report
        .runs_of(ControllerKind::Rl)
        .map(|r| r.final_average_throughput())
        .collect();
    let (m, s) = mean_std(&finals);
    assert_eq!(last[2].parse::<f64>().unwrap(), m);
    assert_eq!(last[3].parse::<f64>().unwrap(), s);
    // penalties only lower the raw average
    for r in &rows {
        assert!(r[4].parse::<f64>().unwrap() <= r[2].parse::<f64>().unwrap() + 1e-12);
    }

    let (_, inst) = csv_rows(&dir.path().join("instantaneous_throughput.csv"));
    assert_eq!(inst.len(), 100 * 4);
    let (_, pos) = csv_rows(&dir.path().join("positions.csv"));
    let users = exp.scenario.num_users();
    assert_eq!(pos.len(), 4 * 3 * exp.position_samples * (1 + users));
}

#[test]
fn sweep_counts_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut exp = small(dir.path());
    exp.seeds = vec![0, 1];
    exp.sweep.alpha = vec![0.1, 0.3, 0.7];
    exp.sweep.gamma = vec![0.9];
    exp.sweep.epsilon0 = vec![0.9];
    let rows = run_sweep(&exp, Execution::Parallel).unwrap();
    assert_eq!(rows.len(), 3);
    let (header, table) = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(
        header,
        ["alpha", "gamma", "epsilon0", "controller", "mean", "std"]
    );
    assert_eq!(table.len(), 3);
    assert_eq!(table[2][0], "0.7");
    assert!(table.iter().all(|r| r[3] == "erl-plos"));
}

#[test]
fn empty_controllers_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut exp = small(&out);
    exp.controllers.clear();
    assert!(matches!(
        run_experiment(&exp, Execution::Parallel),
        Err(Error::Config(_))
    ));
    assert!(!out.exists());
}

#[test]
fn execution_modes_agree() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut exp = small(a.path());
    exp.seeds = vec![4, 5];
    run_experiment(&exp, Execution::Sequential).unwrap();
    exp.output_dir = b.path().to_path_buf();
    run_experiment(&exp, Execution::Parallel).unwrap();
    for name in [
        "summary.csv",
        "aggregate.csv",
        "average_throughput.csv",
        "traces/erl-los_seed5.csv",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn default_warm_start_converges() {
    let exp = Experiment::default_experiment();
    for mode in [LosModel::Probabilistic, LosModel::PureLos] {
        for seed in 0..10 {
            let ws =
                warm_start_for(&exp.scenario, mode, &exp.surrogate, &exp.learning, seed).unwrap();
            assert!(ws.meta.converged, "{mode:?} seed {seed}: {:?}", ws.meta);
            assert!(ws.meta.episodes <= 5_000);
        }
    }
}

#[test]
fn shipped_config_matches_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    let exp = Experiment::load(&path).unwrap();
    let mut expected = Experiment::default_experiment();
    expected.output_dir = exp.output_dir.clone();
    assert_eq!(exp, expected);
}
