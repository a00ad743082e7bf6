//! Value iteration on small deterministic MDPs; the reference the learners
//! are checked against.

use crate::error::Result;
use crate::qlearn::QTable;
use crate::rng::{stream, Stream};
use crate::scenario::Scenario;
use crate::world::{Action, Cell, GridSpec};

/// Deterministic finite MDP with flattened `[state * num_actions + action]`
/// transition and reward tables.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    pub num_states: usize,
    pub num_actions: usize,
    pub next: Vec<usize>,
    pub reward: Vec<f64>,
}

impl TabularMdp {
    pub fn new(num_states: usize, num_actions: usize, next: Vec<usize>, reward: Vec<f64>) -> Self {
        assert_eq!(next.len(), num_states * num_actions);
        assert_eq!(reward.len(), num_states * num_actions);
        assert!(next.iter().all(|&s| s < num_states));
        TabularMdp {
            num_states,
            num_actions,
            next,
            reward,
        }
    }

    /// Adds `c` to every reward.
    pub fn shifted(&self, c: f64) -> Self {
        TabularMdp {
            reward: self.reward.iter().map(|r| r + c).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub num_actions: usize,
    /// Optimal action values, same layout as the MDP tables.
    pub q: Vec<f64>,
    /// Greedy action per state (lowest index among ties).
    pub policy: Vec<usize>,
    pub iterations: usize,
}

impl OracleSolution {
    pub fn q_row(&self, state: usize) -> &[f64] {
        &self.q[state * self.num_actions..(state + 1) * self.num_actions]
    }

    /// Actions whose value is within `tol` of the row maximum.
    pub fn optimal_actions(&self, state: usize, tol: f64) -> Vec<usize> {
        let row = self.q_row(state);
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (0..row.len()).filter(|&a| best - row[a] <= tol).collect()
    }

    pub fn to_qtable(&self, grid: &GridSpec) -> QTable {
        assert_eq!(self.num_actions, Action::COUNT);
        let mut table = QTable::zeros(grid);
        for cell in grid.cells() {
            let row = self.q_row(grid.index(cell));
            table.row_mut(cell).copy_from_slice(row);
        }
        table
    }
}

/// Repeats synchronous Bellman optimality backups until the sup-norm change
/// drops below `tol`.
pub fn value_iteration(mdp: &TabularMdp, gamma: f64, tol: f64) -> OracleSolution {
    let na = mdp.num_actions;
    let mut values = vec![0.0; mdp.num_states];
    let mut q = vec![0.0; mdp.num_states * na];
    let mut iterations = 0;
    loop {
        iterations += 1;
        for (k, qk) in q.iter_mut().enumerate() {
            *qk = mdp.reward[k] + gamma * values[mdp.next[k]];
        }
        let mut delta: f64 = 0.0;
        for (s, v) in values.iter_mut().enumerate() {
            let best = q[s * na..(s + 1) * na]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max((best - *v).abs());
            *v = best;
        }
        if delta < tol || iterations >= 1_000_000 {
            break;
        }
    }
    // one last backup so q is consistent with the final values
    for (k, qk) in q.iter_mut().enumerate() {
        *qk = mdp.reward[k] + gamma * values[mdp.next[k]];
    }
    let policy = (0..mdp.num_states)
        .map(|s| crate::qlearn::argmax(&q[s * na..(s + 1) * na]))
        .collect();
    OracleSolution {
        num_actions: na,
        q,
        policy,
        iterations,
    }
}

/// The UAV grid as an MDP: moving into cell `c` earns `cell_reward[c]`, a
/// move off the grid keeps the UAV in place and adds `boundary_penalty`.
pub fn grid_mdp(grid: &GridSpec, cell_reward: &[f64], boundary_penalty: f64) -> TabularMdp {
    assert_eq!(cell_reward.len(), grid.num_cells());
    let mut next = Vec::with_capacity(grid.num_cells() * Action::COUNT);
    let mut reward = Vec::with_capacity(grid.num_cells() * Action::COUNT);
    for cell in grid.cells() {
        for action in Action::ALL {
            let (to, penalty) = match grid.step(cell, action) {
                Some(to) => (to, 0.0),
                None => (cell, boundary_penalty),
            };
            let k = grid.index(to);
            next.push(k);
            reward.push(cell_reward[k] + penalty);
        }
    }
    TabularMdp::new(grid.num_cells(), Action::COUNT, next, reward)
}

/// Throughput of every cell at slot 1 with the scenario's channel forced
/// deterministic (no shadowing or fading).
pub fn deterministic_reward_field(scenario: &Scenario) -> Result<Vec<f64>> {
    let mut s = scenario.clone();
    s.channel = s.channel.deterministic();
    // deterministic channel draws nothing; streams are placeholders
    let mut sh = stream(0, Stream::Shadowing);
    let mut fa = stream(0, Stream::Fading);
    s.grid
        .cells()
        .map(|c| s.observe(c, 1, &mut sh, &mut fa).map(|o| o.throughput))
        .collect()
}

/// Per-state check that the learned greedy action is one of the oracle's
/// optimal actions. Values within `tie_tol` of the optimum count as ties.
pub fn policy_matches(
    learned: &QTable,
    oracle: &OracleSolution,
    grid: &GridSpec,
    tie_tol: f64,
) -> Vec<(Cell, bool)> {
    grid.cells()
        .map(|cell| {
            let a = learned.greedy(cell).index();
            (
                cell,
                oracle
                    .optimal_actions(grid.index(cell), tie_tol)
                    .contains(&a),
            )
        })
        .collect()
}
