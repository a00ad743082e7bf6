//! Scenario files and the per-slot environment built from them.
//!
//! A scenario is JSON with `grid`, `uav`, `channel`, `obstacles` and `users`
//! sections; `docs/scenario.md` has the schema. Lengths are metres, gains dB,
//! powers dBm.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{realize_gain, Condition, LinkGain, SegmentedChannelParams};
use crate::error::{Error, Result};
use crate::noma::sum_rate_from_total;
use crate::units::dbm_to_watts;
use crate::world::{is_los, link_distance, Cell, GridSpec, Obstacle, Point2, UserTrack};

const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_extent: f64,
    pub cell_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavSection {
    pub altitude: f64,
    pub initial_position: Point2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSection {
    pub transmit_power_dbm: f64,
    pub noise_power_dbm: f64,
    #[serde(flatten)]
    pub segmented: SegmentedChannelParams,
}

/// On-disk layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: Option<String>,
    pub grid: GridSection,
    pub uav: UavSection,
    pub channel: ChannelSection,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub users: Vec<UserTrack>,
}

/// Validated, immutable experiment world.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub grid: GridSpec,
    pub altitude: f64,
    pub initial_cell: Cell,
    pub obstacles: Vec<Obstacle>,
    pub users: Vec<UserTrack>,
    pub channel: SegmentedChannelParams,
    /// Per-user transmit power in watts.
    pub transmit_power: f64,
    /// Receiver noise power in watts.
    pub noise_power: f64,
}

impl Scenario {
    pub fn from_file_spec(file: ScenarioFile) -> Result<Self> {
        let grid = GridSpec::new(file.grid.half_extent, file.grid.cell_size)?;
        let altitude = file.uav.altitude;
        if !(altitude > 0.0) {
            return Err(Error::config("UAV altitude must be positive"));
        }
        let start = file.uav.initial_position;
        let initial_cell = grid
            .coords_to_cell(start)
            .filter(|&c| grid.center(c).distance(start) < 1e-9)
            .ok_or_else(|| {
                Error::config(format!(
                    "initial position ({}, {}) is not a cell centre",
                    start.x, start.y
                ))
            })?;
        for o in &file.obstacles {
            o.validate(altitude)?;
        }
        if file.users.is_empty() {
            return Err(Error::config("scenario needs at least one user"));
        }
        for u in &file.users {
            u.validate(&grid)?;
        }
        file.channel.segmented.validate()?;
        Ok(Scenario {
            name: file.name.unwrap_or_else(|| "unnamed".into()),
            grid,
            altitude,
            initial_cell,
            obstacles: file.obstacles,
            users: file.users,
            channel: file.channel.segmented,
            transmit_power: dbm_to_watts(file.channel.transmit_power_dbm),
            noise_power: dbm_to_watts(file.channel.noise_power_dbm),
        })
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::json(origin, &e))?;
        Self::from_file_spec(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    /// The shipped 3-user urban scenario.
    pub fn default_scenario() -> Self {
        Self::from_json(DEFAULT_SCENARIO, Path::new("<default scenario>"))
            .expect("embedded default scenario is valid")
    }

    pub fn default_scenario_json() -> &'static str {
        DEFAULT_SCENARIO
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn cell_center(&self, cell: Cell) -> Point2 {
        self.grid.center(cell)
    }

    pub fn user_positions(&self, slot: usize) -> Result<Vec<Point2>> {
        self.users.iter().map(|u| u.position(slot)).collect()
    }

    /// Geometric LoS between the UAV above `uav` and a ground user at `user`.
    pub fn line_of_sight(&self, uav: Point2, user: Point2) -> bool {
        is_los(
            uav.at_height(self.altitude),
            user.at_height(0.0),
            &self.obstacles,
        )
    }

    /// Realizes the channels of every user for the UAV at `cell` in `slot`.
    pub fn observe<S, F>(
        &self,
        cell: Cell,
        slot: usize,
        shadowing_rng: &mut S,
        fading_rng: &mut F,
    ) -> Result<SlotObservation>
    where
        S: Rng + ?Sized,
        F: Rng + ?Sized,
    {
        let uav = self.grid.cell_to_coords(cell)?;
        let positions = self.user_positions(slot)?;
        let mut links = Vec::with_capacity(positions.len());
        for &w in &positions {
            let d = link_distance(uav, w, self.altitude);
            let condition = Condition::from_los(self.line_of_sight(uav, w));
            links.push(realize_gain(
                d,
                condition,
                &self.channel,
                shadowing_rng,
                fading_rng,
            )?);
        }
        let total: f64 = links.iter().map(|l| l.gain).sum();
        Ok(SlotObservation {
            throughput: sum_rate_from_total(total, self.transmit_power, self.noise_power),
            positions,
            links,
        })
    }
}

/// What the UAV measures while serving one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotObservation {
    pub positions: Vec<Point2>,
    pub links: Vec<LinkGain>,
    /// Sum-rate throughput in bps/Hz.
    pub throughput: f64,
}
