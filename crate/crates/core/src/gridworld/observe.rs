//! Egocentric partial observation.
//!
//! The agent sees a 7×7 window in front of it. In view coordinates the
//! agent sits at column 3 of the bottom row, facing up. Each visible cell is
//! encoded as `(object class, color, door status)`; cells hidden behind walls
//! or closed doors are reported as [`ObjectClass::Unseen`].

use super::types::{GameState, Item, Tile};

pub const VIEW_SIZE: usize = 7;
pub const VIEW_CELLS: usize = VIEW_SIZE * VIEW_SIZE;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum ObjectClass {
    Unseen = 0,
    Empty = 1,
    Wall = 2,
    Door = 3,
    MultiLockDoor = 4,
    Key = 5,
    Ball = 6,
    HeavyBall = 7,
    Goal = 8,
}

impl ObjectClass {
    pub const COUNT: usize = 9;
}

/// Number of color ids: 0 = no color, 1..=6 = [`super::Color`] + 1.
pub const COLOR_IDS: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum DoorStatus {
    NotDoor = 0,
    Open = 1,
    Closed = 2,
    Locked = 3,
    /// Multi-lock door with every required key applied, still closed.
    Ready = 4,
}

impl DoorStatus {
    pub const COUNT: usize = 5;
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Observation {
    cells: [[u8; 3]; VIEW_CELLS],
}

impl Observation {
    /// Encoded cell at view column `col`, view row `row` (row 6 is the agent's row).
    pub fn cell(&self, col: usize, row: usize) -> [u8; 3] {
        self.cells[row * VIEW_SIZE + col]
    }

    pub fn cells(&self) -> &[[u8; 3]; VIEW_CELLS] {
        &self.cells
    }
}

pub fn encode_tile(tile: Tile) -> [u8; 3] {
    let c = |color: super::Color| color.id() + 1;
    match tile {
        Tile::Floor => [ObjectClass::Empty as u8, 0, 0],
        Tile::Wall => [ObjectClass::Wall as u8, 0, 0],
        Tile::Goal => [ObjectClass::Goal as u8, 0, 0],
        Tile::HeavyBall => [ObjectClass::HeavyBall as u8, 0, 0],
        Tile::Key { color, .. } => [ObjectClass::Key as u8, c(color), 0],
        Tile::Ball { color } => [ObjectClass::Ball as u8, c(color), 0],
        Tile::Door {
            color,
            open,
            locked,
        } => {
            let status = if open {
                DoorStatus::Open
            } else if locked {
                DoorStatus::Locked
            } else {
                DoorStatus::Closed
            };
            [ObjectClass::Door as u8, c(color), status as u8]
        }
        Tile::MultiLockDoor {
            color,
            required,
            applied,
            open,
        } => {
            let status = if open {
                DoorStatus::Open
            } else if applied == required {
                DoorStatus::Ready
            } else {
                DoorStatus::Locked
            };
            [ObjectClass::MultiLockDoor as u8, c(color), status as u8]
        }
    }
}

fn encode_carried(item: Option<Item>) -> [u8; 3] {
    match item {
        Some(item) => encode_tile(item.as_tile()),
        None => [ObjectClass::Empty as u8, 0, 0],
    }
}

/// Builds the egocentric observation for `state`.
pub fn observe(state: &GameState) -> Observation {
    let pos = state.agent.pos;
    let (fx, fy) = state.agent.dir.delta();
    let (rx, ry) = state.agent.dir.right().delta();
    let agent_col = VIEW_SIZE / 2;
    let agent_row = VIEW_SIZE - 1;

    let mut view = [Tile::Wall; VIEW_CELLS];
    for row in 0..VIEW_SIZE {
        for col in 0..VIEW_SIZE {
            let ahead = (agent_row - row) as i64;
            let side = col as i64 - agent_col as i64;
            let x = pos.x as i64 + fx * ahead + rx * side;
            let y = pos.y as i64 + fy * ahead + ry * side;
            view[row * VIEW_SIZE + col] = state.tile_at(x, y).unwrap_or(Tile::Wall);
        }
    }
    // The agent's own cell holds whatever it carries, which never blocks sight.
    view[agent_row * VIEW_SIZE + agent_col] = Tile::Floor;

    let mask = visibility(&view, agent_col, agent_row);
    let mut cells = [[ObjectClass::Unseen as u8, 0, 0]; VIEW_CELLS];
    for i in 0..VIEW_CELLS {
        if mask[i] {
            cells[i] = encode_tile(view[i]);
        }
    }
    cells[agent_row * VIEW_SIZE + agent_col] = encode_carried(state.agent.carrying);
    Observation { cells }
}

/// Minigrid's visibility propagation: sweep rows from the agent outward,
/// spreading sideways and forward from every visible see-through cell.
fn visibility(view: &[Tile; VIEW_CELLS], agent_col: usize, agent_row: usize) -> [bool; VIEW_CELLS] {
    let n = VIEW_SIZE;
    let idx = |c: usize, r: usize| r * n + c;
    let mut mask = [false; VIEW_CELLS];
    mask[idx(agent_col, agent_row)] = true;
    for j in (0..n).rev() {
        for i in 0..n - 1 {
            if !mask[idx(i, j)] || !view[idx(i, j)].see_through() {
                continue;
            }
            mask[idx(i + 1, j)] = true;
            if j > 0 {
                mask[idx(i + 1, j - 1)] = true;
                mask[idx(i, j - 1)] = true;
            }
        }
        for i in (1..n).rev() {
            if !mask[idx(i, j)] || !view[idx(i, j)].see_through() {
                continue;
            }
            mask[idx(i - 1, j)] = true;
            if j > 0 {
                mask[idx(i - 1, j - 1)] = true;
                mask[idx(i, j - 1)] = true;
            }
        }
    }
    mask
}
