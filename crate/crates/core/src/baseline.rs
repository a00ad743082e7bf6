//! Model-based heuristic: each slot, find the cell maximizing the predicted
//! sum rate for the users' current positions, then take one grid step
//! toward it.

use crate::channel::{predicted_gain, LosModel, PredictedChannelParams};
use crate::error::Result;
use crate::qlearn::EpisodeTrace;
use crate::rng::RunStreams;
use crate::scenario::Scenario;
use crate::world::{apply_action, link_distance, Action, Cell, Point2, UavState};

/// Exhaustive search over grid cells for the predicted sum-rate maximizer.
/// Ties go to the lexicographically smallest `(i, j)`.
pub fn solve_p2(
    users: &[Point2],
    scenario: &Scenario,
    predicted: &PredictedChannelParams,
    model: LosModel,
) -> Result<Cell> {
    // log2(1 + P sum / sigma^2) is increasing in the sum, so compare sums
    let mut best = (scenario.initial_cell, f64::NEG_INFINITY);
    for cell in scenario.grid.cells() {
        let uav = scenario.cell_center(cell);
        let mut total = 0.0;
        for &w in users {
            let d = link_distance(uav, w, scenario.altitude);
            total += predicted_gain(d, scenario.altitude, predicted, model)?;
        }
        if total > best.1 {
            best = (cell, total);
        }
    }
    Ok(best.0)
}

/// One step toward `target`, closing the larger axis gap first (i on ties).
pub fn step_toward(current: Cell, target: Cell) -> Action {
    let di = target.i as isize - current.i as isize;
    let dj = target.j as isize - current.j as isize;
    match (di, dj) {
        (0, 0) => Action::Hover,
        _ if di.abs() >= dj.abs() => {
            if di > 0 {
                Action::Right
            } else {
                Action::Left
            }
        }
        _ if dj > 0 => Action::Forward,
        _ => Action::Backward,
    }
}

/// Runs the heuristic for `n_slots` slots. The trace never carries penalties
/// because the step rule cannot leave the grid.
pub fn run_heuristic(
    scenario: &Scenario,
    predicted: &PredictedChannelParams,
    streams: &mut RunStreams,
    n_slots: usize,
) -> Result<EpisodeTrace> {
    let mut trace = EpisodeTrace::with_capacity(n_slots);
    let mut uav = UavState {
        cell: scenario.initial_cell,
        altitude: scenario.altitude,
    };
    for n in 1..=n_slots {
        let obs = scenario.observe(uav.cell, n, &mut streams.shadowing, &mut streams.fading)?;
        let target = solve_p2(&obs.positions, scenario, predicted, LosModel::Probabilistic)?;
        let action = step_toward(uav.cell, target);
        let (next, blocked) = apply_action(uav, action, &scenario.grid);
        debug_assert!(!blocked);
        trace.push(
            uav.cell,
            action,
            obs.throughput,
            None,
            obs.positions,
            obs.links,
        );
        uav = next;
    }
    Ok(trace)
}
