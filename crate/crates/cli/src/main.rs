use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use uavnoma::channel::LosModel;
use uavnoma::harness::{self, output::write_atomic, ControllerKind, Execution, Experiment};

#[derive(Parser)]
#[command(
    name = "uavnoma",
    version,
    about = "UAV trajectory learning for uplink NOMA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment and write traces, summaries and plot data.
    Run(Common),
    /// Train warm-start Q-tables and dump them with a metadata sidecar.
    Warmstart(Common),
    /// Run the heuristic baseline only.
    Baseline(Common),
    /// Compare warm-start greedy policies with value iteration.
    Oracle(Common),
    /// Sweep the learning parameters.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment file, or `default` for the shipped experiment.
    #[arg(long, default_value = "default")]
    config: PathBuf,
    /// Single seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Seed range, `a..b` (exclusive) or `a..=b` (inclusive).
    #[arg(long)]
    seeds: Option<String>,
    /// Flight horizon in slots.
    #[arg(long)]
    slots: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Controller to run; repeat for several.
    #[arg(long = "controller")]
    controllers: Vec<ControllerKind>,
    /// Run jobs one after another.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn experiment(&self) -> Result<Experiment> {
        let mut exp = Experiment::load(&self.config)
            .with_context(|| format!("loading experiment {}", self.config.display()))?;
        if let Some(seed) = self.seed {
            exp.seeds = vec![seed];
        }
        if let Some(range) = &self.seeds {
            exp.seeds = parse_seeds(range)?;
        }
        if let Some(slots) = self.slots {
            exp.slots = slots;
        }
        if let Some(out) = &self.out {
            exp.output_dir = out.clone();
        }
        if !self.controllers.is_empty() {
            exp.controllers = self.controllers.clone();
        }
        exp.validate()?;
        Ok(exp)
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let (a, b, inclusive) = if let Some((a, b)) = s.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = s.split_once("..") {
        (a, b, false)
    } else {
        let seed = s.parse().with_context(|| format!("bad seed {s:?}"))?;
        return Ok(vec![seed]);
    };
    let a: u64 = a
        .trim()
        .parse()
        .with_context(|| format!("bad seed range {s:?}"))?;
    let b: u64 = b
        .trim()
        .parse()
        .with_context(|| format!("bad seed range {s:?}"))?;
    let seeds: Vec<u64> = if inclusive {
        (a..=b).collect()
    } else {
        (a..b).collect()
    };
    if seeds.is_empty() {
        bail!("seed range {s:?} is empty");
    }
    Ok(seeds)
}

fn run(exp: &Experiment, execution: Execution) -> Result<()> {
    let report = harness::run_experiment(exp, execution)?;
    for c in &exp.controllers {
        let finals: Vec<f64> = report
            .runs_of(*c)
            .map(|r| r.final_average_throughput())
            .collect();
        let (mean, std) = harness::output::mean_std(&finals);
        println!(
            "{c:<10} mean throughput {mean:.4} bps/Hz (std {std:.4}, {} runs)",
            finals.len()
        );
    }
    println!(
        "wrote {} files to {}",
        report.files.len(),
        exp.output_dir.display()
    );
    Ok(())
}

fn warm_modes(exp: &Experiment, explicit: bool) -> Vec<ControllerKind> {
    let chosen: Vec<ControllerKind> = exp
        .controllers
        .iter()
        .copied()
        .filter(|c| c.surrogate_mode().is_some())
        .collect();
    if chosen.is_empty() || !explicit {
        vec![ControllerKind::ErlPlos, ControllerKind::ErlLos]
    } else {
        chosen
    }
}

fn warmstart(exp: &Experiment, explicit: bool) -> Result<()> {
    for c in warm_modes(exp, explicit) {
        let mode = c.surrogate_mode().expect("warm-started controller");
        for &seed in &exp.seeds {
            let ws =
                harness::warm_start_for(&exp.scenario, mode, &exp.surrogate, &exp.learning, seed)?;
            let stem = format!("qtable_{c}_seed{seed}");
            let mut csv = Vec::new();
            ws.table.write_csv(&mut csv)?;
            write_atomic(&exp.output_dir.join(format!("{stem}.csv")), &csv)?;
            let meta = serde_json::to_string_pretty(&ws.meta)? + "\n";
            write_atomic(
                &exp.output_dir.join(format!("{stem}.json")),
                meta.as_bytes(),
            )?;
            println!(
                "{c} seed {seed}: {} episodes, converged {}",
                ws.meta.episodes, ws.meta.converged
            );
        }
    }
    Ok(())
}

fn oracle(exp: &Experiment, explicit: bool) -> Result<()> {
    let mut mismatched = false;
    for c in warm_modes(exp, explicit) {
        let mode = c.surrogate_mode().expect("warm-started controller");
        for &seed in &exp.seeds {
            let report = harness::oracle_check(exp, mode, seed)?;
            let name = match mode {
                LosModel::Probabilistic => "plos",
                LosModel::PureLos => "los",
            };
            write_atomic(
                &exp.output_dir.join(format!("oracle_{name}_seed{seed}.csv")),
                report.csv.as_bytes(),
            )?;
            println!(
                "{c} seed {seed}: {}/{} states match value iteration",
                report.matching_states, report.total_states
            );
            mismatched |= report.matching_states != report.total_states;
        }
    }
    if mismatched {
        println!("note: warm start only trains states reachable from the initial cell");
    }
    Ok(())
}

fn sweep(exp: &Experiment, execution: Execution) -> Result<()> {
    let rows = harness::run_sweep(exp, execution)?;
    for r in &rows {
        let (mean, std) = harness::output::mean_std(&r.per_seed);
        println!(
            "alpha {:<5} gamma {:<5} epsilon0 {:<5} {mean:.4} (std {std:.4})",
            r.alpha, r.gamma, r.epsilon0
        );
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(c) => run(&c.experiment()?, c.execution()),
        Command::Baseline(c) => {
            let mut exp = c.experiment()?;
            exp.controllers = vec![ControllerKind::Heuristic];
            run(&exp, c.execution())
        }
        Command::Warmstart(c) => warmstart(&c.experiment()?, !c.controllers.is_empty()),
        Command::Oracle(c) => oracle(&c.experiment()?, !c.controllers.is_empty()),
        Command::Sweep(c) => sweep(&c.experiment()?, c.execution()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
