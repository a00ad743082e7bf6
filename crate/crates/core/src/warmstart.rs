//! Warm start: pre-train the Q-table offline against the predicted channel.
//!
//! Users are frozen at their slot-1 positions and every cell gets the
//! deterministic reward `log2(1 + P sum_k hbar_k / sigma^2)` from the
//! predicted average gain. Obstacles are ignored; the predictor has no
//! occlusion term. Training is episodic with the UAV reset to its initial
//! cell, and stops once the table settles or the episode budget runs out.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{predicted_gain, LosModel, PredictedChannelParams};
use crate::error::{Error, Result};
use crate::noma::sum_rate_from_total;
use crate::qlearn::{train_episodic, EpisodeStart, EpisodicSchedule, LearningParams, QTable};
use crate::scenario::Scenario;
use crate::world::{link_distance, Cell, Point2};

/// Training settings shared by both surrogate modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateConfig {
    pub predicted: PredictedChannelParams,
    pub budget_episodes: usize,
    pub slots_per_episode: usize,
    pub tolerance: f64,
    pub window: usize,
    /// Where each training episode starts.
    pub reset: ResetMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResetMode {
    /// The scenario's initial UAV cell.
    #[default]
    Initial,
    /// A uniformly drawn cell (exploring starts).
    Uniform,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            predicted: PredictedChannelParams::default(),
            budget_episodes: 5_000,
            slots_per_episode: 100,
            tolerance: 1e-3,
            window: 50,
            reset: ResetMode::Initial,
        }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        self.predicted.validate()?;
        if self.window == 0 || self.slots_per_episode == 0 {
            return Err(Error::config(
                "surrogate window and episode length must be positive",
            ));
        }
        if self.budget_episodes != 0 && self.budget_episodes < self.window {
            return Err(Error::config(
                "surrogate budget must be at least the convergence window",
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config("surrogate tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateSpec {
    pub mode: LosModel,
    pub config: SurrogateConfig,
    pub frozen_users: Vec<Point2>,
}

impl SurrogateSpec {
    /// Users frozen where they stand in slot 1.
    pub fn for_scenario(
        scenario: &Scenario,
        mode: LosModel,
        config: SurrogateConfig,
    ) -> Result<Self> {
        Ok(SurrogateSpec {
            mode,
            config,
            frozen_users: scenario.user_positions(1)?,
        })
    }
}

/// Predicted sum rate with the UAV over `cell`.
pub fn surrogate_reward(cell: Cell, spec: &SurrogateSpec, scenario: &Scenario) -> Result<f64> {
    let uav = scenario.grid.cell_to_coords(cell)?;
    predicted_sum_rate(
        uav,
        &spec.frozen_users,
        scenario,
        &spec.config.predicted,
        spec.mode,
    )
}

pub(crate) fn predicted_sum_rate(
    uav: Point2,
    users: &[Point2],
    scenario: &Scenario,
    predicted: &PredictedChannelParams,
    mode: LosModel,
) -> Result<f64> {
    let mut total = 0.0;
    for &w in users {
        let d = link_distance(uav, w, scenario.altitude);
        total += predicted_gain(d, scenario.altitude, predicted, mode)?;
    }
    Ok(sum_rate_from_total(
        total,
        scenario.transmit_power,
        scenario.noise_power,
    ))
}

/// Surrogate reward of every cell, row-major.
pub fn surrogate_reward_field(spec: &SurrogateSpec, scenario: &Scenario) -> Result<Vec<f64>> {
    scenario
        .grid
        .cells()
        .map(|c| surrogate_reward(c, spec, scenario))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarmStartMeta {
    pub mode: LosModel,
    pub episodes: usize,
    pub budget_episodes: usize,
    pub converged: bool,
    /// Largest entry change across the last window, once a full window ran.
    pub window_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub table: QTable,
    pub meta: WarmStartMeta,
}

/// Trains a table on the surrogate from all zeros. Converged means the
/// largest entry change over the last `window` episodes fell below
/// `tolerance`; otherwise the budget ran out and the flag stays false.
pub fn train_qtable<R: Rng + ?Sized>(
    scenario: &Scenario,
    spec: &SurrogateSpec,
    params: &LearningParams,
    rng: &mut R,
) -> Result<WarmStart> {
    spec.config.validate()?;
    params.validate()?;
    let grid = &scenario.grid;
    let field = surrogate_reward_field(spec, scenario)?;
    let mut table = QTable::zeros(grid);
    let cfg = &spec.config;
    let schedule = EpisodicSchedule {
        episodes: cfg.budget_episodes,
        slots_per_episode: cfg.slots_per_episode,
        start: match cfg.reset {
            ResetMode::Initial => EpisodeStart::Fixed(scenario.initial_cell),
            ResetMode::Uniform => EpisodeStart::Uniform,
        },
    };
    let mut history: VecDeque<QTable> = VecDeque::with_capacity(cfg.window + 1);
    history.push_back(table.clone());
    let mut converged = false;
    let mut window_change = None;
    let episodes = train_episodic(
        &mut table,
        grid,
        params,
        &schedule,
        rng,
        |cell| field[grid.index(cell)],
        |_, q| {
            if history.len() > cfg.window {
                let oldest = history.pop_front().expect("non-empty history");
                let change = q.max_abs_diff(&oldest);
                window_change = Some(change);
                if change < cfg.tolerance {
                    converged = true;
                    return false;
                }
            }
            history.push_back(q.clone());
            true
        },
    );
    Ok(WarmStart {
        table,
        meta: WarmStartMeta {
            mode: spec.mode,
            episodes,
            budget_episodes: cfg.budget_episodes,
            converged,
            window_change,
        },
    })
}
