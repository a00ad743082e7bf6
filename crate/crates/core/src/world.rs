//! Discrete geometry: the UAV grid, box obstacles, mobile user tracks and the
//! line-of-sight test between the UAV and a ground user.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Margin used when deciding whether a segment enters an obstacle. Segments
/// that only graze a face (including the roof) within this distance count as
/// line of sight.
pub const OCCLUSION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn at_height(self, z: f64) -> Point3 {
        Point3::new(self.x, self.y, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    fn coord(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

/// 3D link distance between a UAV at horizontal position `uav` and altitude
/// `altitude` and a ground user at `user`. Never smaller than the altitude.
pub fn link_distance(uav: Point2, user: Point2, altitude: f64) -> f64 {
    let dx = uav.x - user.x;
    let dy = uav.y - user.y;
    (dx * dx + dy * dy + altitude * altitude).sqrt()
}

/// Square flight area centred at the origin, partitioned into square cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_extent: f64,
    cell_size: f64,
    cells_per_side: usize,
}

impl GridSpec {
    pub fn new(half_extent: f64, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::config(format!(
                "cell size must be positive, got {cell_size}"
            )));
        }
        if !(half_extent > 0.0) || !half_extent.is_finite() {
            return Err(Error::config(format!(
                "half extent must be positive, got {half_extent}"
            )));
        }
        let ratio = 2.0 * half_extent / cell_size;
        let cells = ratio.round();
        if (ratio - cells).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::config(format!(
                "area side {} m is not a whole number of {cell_size} m cells",
                2.0 * half_extent
            )));
        }
        if cells < 2.0 {
            return Err(Error::config("grid needs at least 2 cells per side"));
        }
        Ok(GridSpec {
            half_extent,
            cell_size,
            cells_per_side: cells as usize,
        })
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn num_cells(&self) -> usize {
        self.cells_per_side * self.cells_per_side
    }

    pub fn contains_cell(&self, cell: Cell) -> bool {
        cell.i < self.cells_per_side && cell.j < self.cells_per_side
    }

    pub fn contains_point(&self, p: Point2) -> bool {
        p.x.abs() <= self.half_extent && p.y.abs() <= self.half_extent
    }

    /// Row-major flat index, used by the Q-table.
    pub fn index(&self, cell: Cell) -> usize {
        debug_assert!(self.contains_cell(cell));
        cell.i * self.cells_per_side + cell.j
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index / self.cells_per_side, index % self.cells_per_side)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.num_cells()).map(|k| self.cell_at(k))
    }

    /// Centre of `cell` in metres.
    pub fn cell_to_coords(&self, cell: Cell) -> Result<Point2> {
        if !self.contains_cell(cell) {
            return Err(Error::Internal(format!(
                "cell ({}, {}) outside a {n}x{n} grid",
                cell.i,
                cell.j,
                n = self.cells_per_side
            )));
        }
        Ok(self.center(cell))
    }

    pub(crate) fn center(&self, cell: Cell) -> Point2 {
        Point2::new(
            -self.half_extent + (cell.i as f64 + 0.5) * self.cell_size,
            -self.half_extent + (cell.j as f64 + 0.5) * self.cell_size,
        )
    }

    /// Cell containing `p`; points on the outer boundary belong to the edge cells.
    pub fn coords_to_cell(&self, p: Point2) -> Option<Cell> {
        if !self.contains_point(p) {
            return None;
        }
        let last = self.cells_per_side - 1;
        let to_index =
            |v: f64| (((v + self.half_extent) / self.cell_size).floor() as usize).min(last);
        Some(Cell::new(to_index(p.x), to_index(p.y)))
    }

    /// Neighbouring cell reached by `action`, or `None` if it leaves the grid.
    pub fn step(&self, cell: Cell, action: Action) -> Option<Cell> {
        let (di, dj) = action.offset();
        let i = cell.i.checked_add_signed(di)?;
        let j = cell.j.checked_add_signed(dj)?;
        let next = Cell::new(i, j);
        self.contains_cell(next).then_some(next)
    }

    /// Manhattan distance in cells.
    pub fn cell_distance(a: Cell, b: Cell) -> usize {
        a.i.abs_diff(b.i) + a.j.abs_diff(b.j)
    }
}

/// Integer grid coordinates; `i` runs along x, `j` along y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
}

impl Cell {
    pub const fn new(i: usize, j: usize) -> Self {
        Cell { i, j }
    }
}

/// One slot of UAV motion. Declaration order is the tie-break order used by
/// greedy action selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Hover,
    Left,
    Right,
    Forward,
    Backward,
}

impl Action {
    pub const COUNT: usize = 5;
    pub const ALL: [Action; Action::COUNT] = [
        Action::Hover,
        Action::Left,
        Action::Right,
        Action::Forward,
        Action::Backward,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Action> {
        Action::ALL.get(index).copied()
    }

    /// Cell offset `(di, dj)`.
    pub fn offset(self) -> (isize, isize) {
        match self {
            Action::Hover => (0, 0),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
            Action::Forward => (0, 1),
            Action::Backward => (0, -1),
        }
    }

    /// Horizontal displacement in metres for a grid of step `cell_size`.
    pub fn displacement(self, cell_size: f64) -> (f64, f64) {
        let (di, dj) = self.offset();
        (di as f64 * cell_size, dj as f64 * cell_size)
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Hover => "hover",
            Action::Left => "left",
            Action::Right => "right",
            Action::Forward => "forward",
            Action::Backward => "backward",
        }
    }
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    pub cell: Cell,
    pub altitude: f64,
}

/// Moves the UAV by one action. A move that would leave the grid is
/// blocked: the UAV stays put and the returned flag is set so the caller can
/// charge the boundary penalty.
pub fn apply_action(state: UavState, action: Action, grid: &GridSpec) -> (UavState, bool) {
    match grid.step(state.cell, action) {
        Some(cell) => (UavState { cell, ..state }, false),
        None => (state, true),
    }
}

/// Axis-aligned building footprint extruded from the ground to `height`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub height: f64,
}

impl Obstacle {
    pub fn validate(&self, uav_altitude: f64) -> Result<()> {
        if !(self.x_min < self.x_max && self.y_min < self.y_max) {
            return Err(Error::config(format!(
                "degenerate obstacle footprint {self:?}"
            )));
        }
        if !(self.height > 0.0 && self.height < uav_altitude) {
            return Err(Error::config(format!(
                "obstacle height {} must lie in (0, {uav_altitude})",
                self.height
            )));
        }
        Ok(())
    }

    pub fn contains_point(&self, p: Point3) -> bool {
        p.x > self.x_min
            && p.x < self.x_max
            && p.y > self.y_min
            && p.y < self.y_max
            && p.z > 0.0
            && p.z < self.height
    }

    /// Slab test: does the segment `a -> b` pass through the box interior?
    pub fn blocks_segment(&self, a: Point3, b: Point3) -> bool {
        let tol = OCCLUSION_TOLERANCE;
        let lo = [self.x_min + tol, self.y_min + tol, tol];
        let hi = [self.x_max - tol, self.y_max - tol, self.height - tol];
        let (mut t_enter, mut t_exit) = (0.0_f64, 1.0_f64);
        for axis in 0..3 {
            let origin = a.coord(axis);
            let dir = b.coord(axis) - origin;
            if dir.abs() < f64::EPSILON {
                if origin <= lo[axis] || origin >= hi[axis] {
                    return false;
                }
                continue;
            }
            let mut t0 = (lo[axis] - origin) / dir;
            let mut t1 = (hi[axis] - origin) / dir;
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            t_enter = t_enter.max(t0);
            t_exit = t_exit.min(t1);
            if t_enter >= t_exit {
                return false;
            }
        }
        true
    }
}

/// True iff the segment between the UAV and the ground user crosses no obstacle.
pub fn is_los(uav: Point3, user: Point3, obstacles: &[Obstacle]) -> bool {
    !obstacles.iter().any(|o| o.blocks_segment(uav, user))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub slot: usize,
    pub x: f64,
    pub y: f64,
}

impl Waypoint {
    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Piecewise-linear user trajectory over slots (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTrack {
    pub waypoints: Vec<Waypoint>,
}

impl UserTrack {
    pub fn new(waypoints: Vec<Waypoint>) -> Self {
        UserTrack { waypoints }
    }

    pub fn stationary(at: Point2) -> Self {
        UserTrack::new(vec![Waypoint {
            slot: 1,
            x: at.x,
            y: at.y,
        }])
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let Some(first) = self.waypoints.first() else {
            return Err(Error::config("user track has no waypoints"));
        };
        if first.slot == 0 {
            return Err(Error::config("waypoint slots are 1-based"));
        }
        for w in &self.waypoints {
            if !grid.contains_point(w.position()) {
                return Err(Error::config(format!(
                    "waypoint ({}, {}) at slot {} lies outside the area",
                    w.x, w.y, w.slot
                )));
            }
        }
        for pair in self.waypoints.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b.slot <= a.slot {
                return Err(Error::config(format!(
                    "waypoint slots must strictly increase ({} then {})",
                    a.slot, b.slot
                )));
            }
            let speed = a.position().distance(b.position()) / (b.slot - a.slot) as f64;
            if speed >= grid.cell_size() {
                return Err(Error::config(format!(
                    "user moves {speed:.3} m per slot between slots {} and {}; must be below the UAV step {}",
                    a.slot,
                    b.slot,
                    grid.cell_size()
                )));
            }
        }
        Ok(())
    }

    /// Position at slot `n`, interpolated between bracketing waypoints and
    /// clamped outside the waypoint range.
    pub fn position(&self, n: usize) -> Result<Point2> {
        let wps = &self.waypoints;
        let (first, last) = match (wps.first(), wps.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::config("user track has no waypoints")),
        };
        if n <= first.slot {
            return Ok(first.position());
        }
        if n >= last.slot {
            return Ok(last.position());
        }
        // first index whose slot is >= n; n is strictly inside the range here
        let k = wps.partition_point(|w| w.slot < n);
        let (a, b) = (wps[k - 1], wps[k]);
        let t = (n - a.slot) as f64 / (b.slot - a.slot) as f64;
        Ok(a.position().lerp(b.position(), t))
    }
}
