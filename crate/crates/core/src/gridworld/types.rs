use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// The seven agent actions, with minigrid's index ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Action {
    Left = 0,
    Right = 1,
    Forward = 2,
    Pickup = 3,
    Drop = 4,
    Toggle = 5,
    Done = 6,
}

impl Action {
    pub const COUNT: usize = 7;
    pub const ALL: [Action; 7] = [
        Action::Left,
        Action::Right,
        Action::Forward,
        Action::Pickup,
        Action::Drop,
        Action::Toggle,
        Action::Done,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_id(id: u8) -> Option<Action> {
        Action::ALL.get(id as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Left => "left",
            Action::Right => "right",
            Action::Forward => "forward",
            Action::Pickup => "pickup",
            Action::Drop => "drop",
            Action::Toggle => "toggle",
            Action::Done => "done",
        }
    }
}

impl TryFrom<u8> for Action {
    type Error = u8;

    fn try_from(id: u8) -> Result<Self, Self::Error> {
        Action::from_id(id).ok_or(id)
    }
}

impl Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.id())
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let id = u8::deserialize(d)?;
        Action::from_id(id)
            .ok_or_else(|| serde::de::Error::custom(format!("action id {id} out of range 0..=6")))
    }
}

/// Agent heading. Ids follow minigrid: 0 east, 1 south, 2 west, 3 north.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Direction {
    East = 0,
    South = 1,
    West = 2,
    North = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::East,
        Direction::South,
        Direction::West,
        Direction::North,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Direction> {
        Direction::ALL.get(id as usize).copied()
    }

    pub fn left(self) -> Direction {
        Direction::ALL[(self as usize + 3) % 4]
    }

    pub fn right(self) -> Direction {
        Direction::ALL[(self as usize + 1) % 4]
    }

    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::East => (1, 0),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
            Direction::North => (0, -1),
        }
    }

    /// Minimal number of quarter turns between two headings (0..=2).
    pub fn rotation_steps(self, other: Direction) -> u32 {
        let d = (self as i32 - other as i32).unsigned_abs() % 4;
        d.min(4 - d)
    }
}

impl Serialize for Direction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.id())
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let id = u8::deserialize(d)?;
        Direction::from_id(id)
            .ok_or_else(|| serde::de::Error::custom(format!("direction {id} out of range 0..=3")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Red,
    Green,
    Blue,
    Purple,
    Yellow,
    Grey,
}

impl Color {
    pub const ALL: [Color; 6] = [
        Color::Red,
        Color::Green,
        Color::Blue,
        Color::Purple,
        Color::Yellow,
        Color::Grey,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }
}

/// Grid coordinate: `x` is the column, `y` the row. Serialized as `[x, y]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct CellCoord {
    pub x: usize,
    pub y: usize,
}

impl CellCoord {
    pub const fn new(x: usize, y: usize) -> Self {
        CellCoord { x, y }
    }

    pub fn manhattan(self, other: CellCoord) -> usize {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl From<[usize; 2]> for CellCoord {
    fn from([x, y]: [usize; 2]) -> Self {
        CellCoord { x, y }
    }
}

impl From<CellCoord> for [usize; 2] {
    fn from(c: CellCoord) -> Self {
        [c.x, c.y]
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KeyId(pub u8);

impl KeyId {
    pub const MAX: u8 = 7;
}

/// Set of key ids (0..=7) stored as a bitmask. Serialized as a sorted id list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<KeyId>", into = "Vec<KeyId>")]
pub struct KeySet(u8);

impl KeySet {
    pub const EMPTY: KeySet = KeySet(0);

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, id: KeyId) -> bool {
        id.0 <= KeyId::MAX && self.0 & (1 << id.0) != 0
    }

    pub fn with(self, id: KeyId) -> KeySet {
        debug_assert!(id.0 <= KeyId::MAX);
        KeySet(self.0 | (1 << id.0))
    }

    pub fn is_subset(self, other: KeySet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = KeyId> {
        (0..=KeyId::MAX).filter(move |i| self.0 & (1 << i) != 0).map(KeyId)
    }
}

impl FromIterator<KeyId> for KeySet {
    fn from_iter<I: IntoIterator<Item = KeyId>>(iter: I) -> Self {
        iter.into_iter().fold(KeySet::EMPTY, KeySet::with)
    }
}

impl From<Vec<KeyId>> for KeySet {
    fn from(ids: Vec<KeyId>) -> Self {
        ids.into_iter().filter(|k| k.0 <= KeyId::MAX).collect()
    }
}

impl From<KeySet> for Vec<KeyId> {
    fn from(set: KeySet) -> Self {
        set.iter().collect()
    }
}

/// Contents of one grid cell. Items (keys, balls) lie on floor; picking
/// one up turns the cell back into `Floor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tile {
    Floor,
    Wall,
    Goal,
    Door {
        color: Color,
        open: bool,
        locked: bool,
    },
    MultiLockDoor {
        color: Color,
        required: KeySet,
        applied: KeySet,
        open: bool,
    },
    Key {
        color: Color,
        id: KeyId,
    },
    Ball {
        color: Color,
    },
    HeavyBall,
}

impl Tile {
    /// Whether the agent may stand on this tile.
    pub fn occupiable(self) -> bool {
        match self {
            Tile::Floor | Tile::Goal => true,
            Tile::Door { open, .. } | Tile::MultiLockDoor { open, .. } => open,
            _ => false,
        }
    }

    /// Light passes through everything except walls and closed doors.
    pub fn see_through(self) -> bool {
        match self {
            Tile::Wall => false,
            Tile::Door { open, .. } | Tile::MultiLockDoor { open, .. } => open,
            _ => true,
        }
    }

    pub fn is_door(self) -> bool {
        matches!(self, Tile::Door { .. } | Tile::MultiLockDoor { .. })
    }

    pub fn item(self) -> Option<Item> {
        match self {
            Tile::Key { color, id } => Some(Item::Key { color, id }),
            Tile::Ball { color } => Some(Item::Ball { color }),
            _ => None,
        }
    }
}

/// Something the agent can carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Item {
    Key { color: Color, id: KeyId },
    Ball { color: Color },
}

impl Item {
    pub fn as_tile(self) -> Tile {
        match self {
            Item::Key { color, id } => Tile::Key { color, id },
            Item::Ball { color } => Tile::Ball { color },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentState {
    pub pos: CellCoord,
    pub dir: Direction,
    pub carrying: Option<Item>,
}

/// Complete snapshot of one environment instant.
///
/// The grid lives behind an `Arc` and is copied on write, so cloning a
/// state is cheap and stepping a clone never touches the original.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GameState {
    width: usize,
    height: usize,
    grid: Arc<Vec<Tile>>,
    pub agent: AgentState,
    pub step_count: u32,
    pub done: bool,
}

impl GameState {
    pub fn new(width: usize, height: usize, grid: Vec<Tile>, agent: AgentState) -> Self {
        assert_eq!(grid.len(), width * height, "grid size mismatch");
        GameState {
            width,
            height,
            grid: Arc::new(grid),
            agent,
            step_count: 0,
            done: false,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.grid
    }

    pub fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn tile(&self, c: CellCoord) -> Tile {
        self.grid[c.y * self.width + c.x]
    }

    /// Tile at signed coordinates; out-of-bounds reads as `None`.
    pub fn tile_at(&self, x: i64, y: i64) -> Option<Tile> {
        self.in_bounds(x, y)
            .then(|| self.grid[y as usize * self.width + x as usize])
    }

    pub(crate) fn set_tile(&mut self, c: CellCoord, tile: Tile) {
        let w = self.width;
        Arc::make_mut(&mut self.grid)[c.y * w + c.x] = tile;
    }

    /// The cell the agent is facing, if it lies inside the grid.
    pub fn front_cell(&self) -> Option<CellCoord> {
        let (dx, dy) = self.agent.dir.delta();
        let x = self.agent.pos.x as i64 + dx;
        let y = self.agent.pos.y as i64 + dy;
        self.in_bounds(x, y)
            .then(|| CellCoord::new(x as usize, y as usize))
    }

    pub fn cells(&self) -> impl Iterator<Item = (CellCoord, Tile)> + '_ {
        let w = self.width;
        self.grid
            .iter()
            .enumerate()
            .map(move |(i, t)| (CellCoord::new(i % w, i / w), *t))
    }

    /// True when the two states agree on everything except `step_count`.
    pub fn same_configuration(&self, other: &GameState) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.agent == other.agent
            && self.done == other.done
            && (Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid)
    }
}
