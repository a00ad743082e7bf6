//! Experiment orchestration: configuration, seeded runs of every controller,
//! aggregation and file output.
//!
//! Every run is a pure function of `(experiment, controller, seed)`. Runs
//! share no mutable state and may execute in parallel; outputs are
//! assembled in job order, so files are byte-identical across executions.

pub mod exec;
pub mod oracle;
pub mod output;
pub mod plot;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baseline::run_heuristic;
use crate::channel::LosModel;
use crate::error::{Error, Result};
use crate::qlearn::{run_online, EpisodeTrace, LearningParams, QTable};
use crate::rng::{stream, RunStreams, Stream};
use crate::scenario::Scenario;
use crate::warmstart::{
    surrogate_reward_field, train_qtable, SurrogateConfig, SurrogateSpec, WarmStart, WarmStartMeta,
};
use crate::world::Point2;

pub use exec::Execution;
use output::{mean_std, trace_csv, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    /// Q-learning from an all-zero table.
    Rl,
    /// Q-learning warm-started on the probabilistic-LoS surrogate.
    ErlPlos,
    /// Q-learning warm-started on the pure-LoS surrogate.
    ErlLos,
    /// Per-slot predicted-channel grid search.
    Heuristic,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 4] = [
        ControllerKind::Rl,
        ControllerKind::ErlPlos,
        ControllerKind::ErlLos,
        ControllerKind::Heuristic,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ControllerKind::Rl => "rl",
            ControllerKind::ErlPlos => "erl-plos",
            ControllerKind::ErlLos => "erl-los",
            ControllerKind::Heuristic => "heuristic",
        }
    }

    pub fn surrogate_mode(self) -> Option<LosModel> {
        match self {
            ControllerKind::ErlPlos => Some(LosModel::Probabilistic),
            ControllerKind::ErlLos => Some(LosModel::PureLos),
            _ => None,
        }
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ControllerKind::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown controller {s:?} (rl, erl-plos, erl-los, heuristic)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub controller: ControllerKind,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub epsilon0: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            controller: ControllerKind::ErlPlos,
            alpha: vec![0.1, 0.3, 0.7],
            gamma: vec![0.5, 0.9],
            epsilon0: vec![0.5, 0.9],
        }
    }
}

/// Experiment file layout; `docs/config.md` has the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentFile {
    /// `"default"` for the shipped scenario, else a path relative to the
    /// experiment file.
    pub scenario: String,
    pub controllers: Vec<ControllerKind>,
    pub seeds: Vec<u64>,
    pub slots: usize,
    pub learning: LearningParams,
    pub surrogate: SurrogateConfig,
    pub output_dir: PathBuf,
    pub sweep: SweepConfig,
    /// Slots sampled for the position plot data.
    pub position_samples: usize,
}

impl Default for ExperimentFile {
    fn default() -> Self {
        ExperimentFile {
            scenario: "default".into(),
            controllers: ControllerKind::ALL.to_vec(),
            seeds: (0..10).collect(),
            slots: 10_000,
            learning: LearningParams::default(),
            surrogate: SurrogateConfig::default(),
            output_dir: PathBuf::from("out"),
            sweep: SweepConfig::default(),
            position_samples: 8,
        }
    }
}

/// A resolved, validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub scenario: Scenario,
    pub controllers: Vec<ControllerKind>,
    pub seeds: Vec<u64>,
    pub slots: usize,
    pub learning: LearningParams,
    pub surrogate: SurrogateConfig,
    pub output_dir: PathBuf,
    pub sweep: SweepConfig,
    pub position_samples: usize,
}

impl Experiment {
    pub fn from_file_spec(file: ExperimentFile, base_dir: &Path) -> Result<Self> {
        let scenario = if file.scenario == "default" {
            Scenario::default_scenario()
        } else {
            Scenario::load(&base_dir.join(&file.scenario))?
        };
        let exp = Experiment {
            scenario,
            controllers: file.controllers,
            seeds: file.seeds,
            slots: file.slots,
            learning: file.learning,
            surrogate: file.surrogate,
            output_dir: file.output_dir,
            sweep: file.sweep,
            position_samples: file.position_samples,
        };
        exp.validate()?;
        Ok(exp)
    }

    /// The shipped experiment: default scenario, all controllers, seeds 0-9,
    /// 10 000 slots.
    pub fn default_experiment() -> Self {
        Self::from_file_spec(ExperimentFile::default(), Path::new("."))
            .expect("default experiment is valid")
    }

    /// Loads `path`, or the shipped experiment when `path` is `default`.
    pub fn load(path: &Path) -> Result<Self> {
        if path == Path::new("default") {
            return Ok(Self::default_experiment());
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ExperimentFile =
            serde_json::from_str(&text).map_err(|e| Error::json(path, &e))?;
        Self::from_file_spec(file, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.controllers.is_empty() {
            return Err(Error::config("no controllers selected"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("no seeds given"));
        }
        if self.slots == 0 {
            return Err(Error::config("slot count must be at least 1"));
        }
        self.learning.validate()?;
        self.surrogate.validate()
    }

    fn jobs(&self) -> Vec<(ControllerKind, u64)> {
        self.controllers
            .iter()
            .flat_map(|&c| self.seeds.iter().map(move |&s| (c, s)))
            .collect()
    }

    pub fn trace_path(&self, controller: ControllerKind, seed: u64) -> PathBuf {
        self.output_dir
            .join("traces")
            .join(format!("{}_seed{seed}.csv", controller.id()))
    }
}

/// UAV and user positions at one sampled slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionSample {
    pub slot: usize,
    pub uav: Point2,
    pub users: Vec<Point2>,
}

/// Per-run results kept after the trace has been written out.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub controller: ControllerKind,
    pub seed: u64,
    /// Instantaneous throughput per slot.
    pub throughput: Vec<f64>,
    /// Mean throughput over the first `n` slots, at index `n - 1`.
    pub average_throughput: Vec<f64>,
    /// Mean reward (throughput plus penalties) over the first `n` slots.
    pub average_reward: Vec<f64>,
    pub boundary_violations: usize,
    pub positions: Vec<PositionSample>,
    pub warm_start: Option<WarmStartMeta>,
}

impl RunSummary {
    pub fn from_trace(
        controller: ControllerKind,
        seed: u64,
        trace: &EpisodeTrace,
        sample_slots: &[usize],
        scenario: &Scenario,
        warm_start: Option<WarmStartMeta>,
    ) -> Self {
        let throughput = trace.throughputs();
        let average_throughput = prefix_means(&throughput);
        let average_reward = trace.records.iter().map(|r| r.running_avg).collect();
        let positions = sample_slots
            .iter()
            .filter_map(|&s| trace.records.get(s.wrapping_sub(1)))
            .map(|r| PositionSample {
                slot: r.slot,
                uav: scenario.cell_center(r.cell),
                users: r.positions.clone(),
            })
            .collect();
        RunSummary {
            controller,
            seed,
            throughput,
            average_throughput,
            average_reward,
            boundary_violations: trace
                .records
                .iter()
                .filter(|r| r.boundary_violation)
                .count(),
            positions,
            warm_start,
        }
    }

    pub fn slots(&self) -> usize {
        self.throughput.len()
    }

    /// Objective value: mean throughput over the whole horizon.
    pub fn final_average_throughput(&self) -> f64 {
        *self.average_throughput.last().expect("non-empty run")
    }

    pub fn final_average_reward(&self) -> f64 {
        *self.average_reward.last().expect("non-empty run")
    }

    /// Mean throughput over the first `n` slots (clamped to `1..=N`).
    pub fn average_throughput_at(&self, n: usize) -> f64 {
        self.average_throughput[n.clamp(1, self.slots()) - 1]
    }

    /// Mean throughput over the last quarter of the horizon (at least one slot).
    pub fn last_quarter_throughput(&self) -> f64 {
        let n = self.slots();
        let tail = &self.throughput[n - (n / 4).max(1)..];
        tail.iter().sum::<f64>() / tail.len() as f64
    }
}

pub(crate) fn prefix_means(values: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            sum += v;
            sum / (k + 1) as f64
        })
        .collect()
}

pub(crate) fn sample_slots(n_slots: usize, samples: usize) -> Vec<usize> {
    let mut slots: Vec<usize> = (1..=samples)
        .map(|k| (k * n_slots / samples).max(1))
        .collect();
    slots.dedup();
    slots
}

/// Warm-start table for `controller`, trained with the run's surrogate stream.
pub fn warm_start_for(
    scenario: &Scenario,
    mode: LosModel,
    surrogate: &SurrogateConfig,
    learning: &LearningParams,
    seed: u64,
) -> Result<WarmStart> {
    let spec = SurrogateSpec::for_scenario(scenario, mode, *surrogate)?;
    train_qtable(
        scenario,
        &spec,
        learning,
        &mut stream(seed, Stream::Surrogate),
    )
}

/// Runs one controller for one seed and returns the full trace.
pub fn run_controller(
    scenario: &Scenario,
    controller: ControllerKind,
    seed: u64,
    slots: usize,
    learning: &LearningParams,
    surrogate: &SurrogateConfig,
) -> Result<(EpisodeTrace, Option<WarmStartMeta>)> {
    let mut streams = RunStreams::new(seed);
    match controller {
        ControllerKind::Rl => {
            let (_, trace) = run_online(
                scenario,
                QTable::zeros(&scenario.grid),
                learning,
                &mut streams,
                slots,
            )?;
            Ok((trace, None))
        }
        ControllerKind::ErlPlos | ControllerKind::ErlLos => {
            let mode = controller
                .surrogate_mode()
                .expect("warm-started controller");
            let warm = warm_start_for(scenario, mode, surrogate, learning, seed)?;
            let (_, trace) = run_online(scenario, warm.table, learning, &mut streams, slots)?;
            Ok((trace, Some(warm.meta)))
        }
        ControllerKind::Heuristic => {
            let trace = run_heuristic(scenario, &surrogate.predicted, &mut streams, slots)?;
            Ok((trace, None))
        }
    }
}

fn run_job(
    exp: &Experiment,
    controller: ControllerKind,
    seed: u64,
    learning: &LearningParams,
    write_trace: bool,
) -> Result<RunSummary> {
    let (trace, warm) = run_controller(
        &exp.scenario,
        controller,
        seed,
        exp.slots,
        learning,
        &exp.surrogate,
    )?;
    if write_trace {
        write_atomic(
            &exp.trace_path(controller, seed),
            trace_csv(&trace).as_bytes(),
        )?;
    }
    let samples = sample_slots(exp.slots, exp.position_samples);
    Ok(RunSummary::from_trace(
        controller,
        seed,
        &trace,
        &samples,
        &exp.scenario,
        warm,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub runs: Vec<RunSummary>,
    pub files: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn runs_of(&self, controller: ControllerKind) -> impl Iterator<Item = &RunSummary> {
        self.runs.iter().filter(move |r| r.controller == controller)
    }
}

/// Runs every (controller, seed) pair, writes one trace CSV per run plus
/// `summary.csv`, `aggregate.csv` and the plot data.
pub fn run_experiment(exp: &Experiment, execution: Execution) -> Result<ExperimentReport> {
    exp.validate()?;
    let results = execution.map(exp.jobs(), |(c, s)| run_job(exp, c, s, &exp.learning, true));
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut files: Vec<PathBuf> = runs
        .iter()
        .map(|r| exp.trace_path(r.controller, r.seed))
        .collect();

    let summary = exp.output_dir.join("summary.csv");
    write_atomic(&summary, summary_csv(&runs).as_bytes())?;
    let aggregate = exp.output_dir.join("aggregate.csv");
    write_atomic(&aggregate, aggregate_csv(&runs).as_bytes())?;
    files.extend([summary, aggregate]);
    files.extend(plot::emit_plot_data(&runs, &[], &exp.output_dir)?);
    Ok(ExperimentReport { runs, files })
}

/// Runs the experiment without writing anything.
pub fn simulate(exp: &Experiment, execution: Execution) -> Result<Vec<RunSummary>> {
    exp.validate()?;
    execution
        .map(exp.jobs(), |(c, s)| {
            run_job(exp, c, s, &exp.learning, false)
        })
        .into_iter()
        .collect()
}

pub fn summary_csv(runs: &[RunSummary]) -> String {
    let mut out = String::from(
        "controller,seed,slots,final_avg_reward,final_avg_throughput,avg_throughput_first_quarter,\
         avg_throughput_last_quarter,boundary_violations,warm_episodes,warm_converged\n",
    );
    for r in runs {
        let (episodes, converged) = match &r.warm_start {
            Some(m) => (m.episodes.to_string(), m.converged.to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.controller,
            r.seed,
            r.slots(),
            r.final_average_reward(),
            r.final_average_throughput(),
            r.average_throughput_at(r.slots() / 4),
            r.last_quarter_throughput(),
            r.boundary_violations,
            episodes,
            converged
        )
        .unwrap();
    }
    out
}

/// Per-controller mean and sample std over seeds of the final averages.
pub fn aggregate_csv(runs: &[RunSummary]) -> String {
    let mut out =
        String::from("controller,runs,mean_throughput,std_throughput,mean_reward,std_reward\n");
    for c in controllers_in_order(runs) {
        let of: Vec<&RunSummary> = runs.iter().filter(|r| r.controller == c).collect();
        let thr: Vec<f64> = of.iter().map(|r| r.final_average_throughput()).collect();
        let rew: Vec<f64> = of.iter().map(|r| r.final_average_reward()).collect();
        let (tm, ts) = mean_std(&thr);
        let (rm, rs) = mean_std(&rew);
        writeln!(out, "{c},{},{tm},{ts},{rm},{rs}", of.len()).unwrap();
    }
    out
}

pub(crate) fn controllers_in_order(runs: &[RunSummary]) -> Vec<ControllerKind> {
    let mut seen = Vec::new();
    for r in runs {
        if !seen.contains(&r.controller) {
            seen.push(r.controller);
        }
    }
    seen
}

/// One learning-parameter combination of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon0: f64,
    pub controller: ControllerKind,
    /// Final average throughput per seed.
    pub per_seed: Vec<f64>,
}

/// Grid over `(alpha, gamma, epsilon0)` for the sweep controller; writes
/// `sweep.csv`.
pub fn run_sweep(exp: &Experiment, execution: Execution) -> Result<Vec<SweepRow>> {
    exp.validate()?;
    let sw = &exp.sweep;
    if sw.alpha.is_empty() || sw.gamma.is_empty() || sw.epsilon0.is_empty() {
        return Err(Error::config(
            "sweep needs at least one value per parameter",
        ));
    }
    let mut combos = Vec::new();
    for &alpha in &sw.alpha {
        for &gamma in &sw.gamma {
            for &epsilon0 in &sw.epsilon0 {
                let learning = LearningParams {
                    alpha,
                    gamma,
                    epsilon0,
                    ..exp.learning
                };
                learning.validate()?;
                combos.push(learning);
            }
        }
    }
    let jobs: Vec<(LearningParams, u64)> = combos
        .iter()
        .flat_map(|&l| exp.seeds.iter().map(move |&s| (l, s)))
        .collect();
    let finals = execution
        .map(jobs, |(l, s)| {
            run_job(exp, sw.controller, s, &l, false).map(|r| r.final_average_throughput())
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<SweepRow> = combos
        .iter()
        .zip(finals.chunks(exp.seeds.len()))
        .map(|(l, per_seed)| SweepRow {
            alpha: l.alpha,
            gamma: l.gamma,
            epsilon0: l.epsilon0,
            controller: sw.controller,
            per_seed: per_seed.to_vec(),
        })
        .collect();
    plot::write_sweep(&rows, &exp.output_dir)?;
    Ok(rows)
}

/// Warm-start table versus value iteration on the same surrogate MDP.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub mode: LosModel,
    pub meta: WarmStartMeta,
    pub matching_states: usize,
    pub total_states: usize,
    pub csv: String,
}

/// Trains the warm-start table for `mode` and compares its greedy policy
/// with value iteration on the surrogate, state by state.
pub fn oracle_check(exp: &Experiment, mode: LosModel, seed: u64) -> Result<OracleReport> {
    let scenario = &exp.scenario;
    let warm = warm_start_for(scenario, mode, &exp.surrogate, &exp.learning, seed)?;
    let spec = SurrogateSpec::for_scenario(scenario, mode, exp.surrogate)?;
    let field = surrogate_reward_field(&spec, scenario)?;
    let mdp = oracle::grid_mdp(&scenario.grid, &field, exp.learning.boundary_penalty);
    let solution = oracle::value_iteration(&mdp, exp.learning.gamma, 1e-10);
    let checks =
        oracle::policy_matches(&warm.table, &solution, &scenario.grid, ORACLE_TIE_TOLERANCE);
    let mut csv = String::from("cell_i,cell_j,oracle_action,learned_action,match\n");
    for &(cell, ok) in &checks {
        let k = scenario.grid.index(cell);
        let oracle_action = crate::world::Action::ALL[solution.policy[k]];
        writeln!(
            csv,
            "{},{},{},{},{}",
            cell.i,
            cell.j,
            oracle_action,
            warm.table.greedy(cell),
            u8::from(ok)
        )
        .unwrap();
    }
    Ok(OracleReport {
        mode,
        meta: warm.meta,
        matching_states: checks.iter().filter(|(_, ok)| *ok).count(),
        total_states: checks.len(),
        csv,
    })
}

/// Oracle action values closer than this to the row maximum are ties.
pub const ORACLE_TIE_TOLERANCE: f64 = 1e-9;
