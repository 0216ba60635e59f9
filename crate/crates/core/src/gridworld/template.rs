//! Environment templates and their seeded instantiation.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::types::{AgentState, CellCoord, Color, Direction, GameState, KeyId, KeySet, Tile};

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("invalid template `{name}`: {reason}")]
    InvalidTemplate { name: String, reason: String },
    #[error("could not instantiate `{name}` after {attempts} attempts")]
    PlacementFailed { name: String, attempts: u32 },
    #[error("reading template file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing template file: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "lock", rename_all = "snake_case")]
pub enum DoorLock {
    Unlocked,
    /// A plain locked door; the referenced key takes the door's color.
    Locked { key: KeyId },
    MultiLock { required: Vec<KeyId> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoorSlot {
    pub positions: Vec<CellCoord>,
    #[serde(flatten)]
    pub lock: DoorLock,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeySlot {
    pub id: KeyId,
    pub positions: Vec<CellCoord>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    #[serde(default)]
    pub sideways: bool,
    #[serde(default)]
    pub distractor_doors: usize,
    #[serde(default)]
    pub heavy_balls: usize,
}

/// A parameterized environment. Layout characters are resolved through
/// `legend`; door, key, agent and distractor placements are drawn from the
/// slot lists at instantiation time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvTemplate {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub legend: BTreeMap<char, LegendTile>,
    pub layout: Vec<String>,
    pub agent_starts: Vec<CellCoord>,
    pub agent_dirs: Vec<Direction>,
    pub door_colors: Vec<Color>,
    #[serde(default)]
    pub doors: Vec<DoorSlot>,
    #[serde(default)]
    pub keys: Vec<KeySlot>,
    #[serde(default)]
    pub distractor_cells: Vec<CellCoord>,
    #[serde(default)]
    pub variant: Variant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegendTile {
    Wall,
    Floor,
    Goal,
    HeavyBall,
}

impl LegendTile {
    fn tile(self) -> Tile {
        match self {
            LegendTile::Wall => Tile::Wall,
            LegendTile::Floor => Tile::Floor,
            LegendTile::Goal => Tile::Goal,
            LegendTile::HeavyBall => Tile::HeavyBall,
        }
    }
}

pub fn default_legend() -> BTreeMap<char, LegendTile> {
    BTreeMap::from([
        ('#', LegendTile::Wall),
        ('.', LegendTile::Floor),
        ('G', LegendTile::Goal),
        ('O', LegendTile::HeavyBall),
    ])
}

/// A concrete environment: template name, seed and the initial state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvInstance {
    pub template: String,
    pub seed: u64,
    pub initial: GameState,
}

impl EnvInstance {
    pub fn width(&self) -> usize {
        self.initial.width()
    }

    pub fn height(&self) -> usize {
        self.initial.height()
    }

    pub fn start(&self) -> CellCoord {
        self.initial.agent.pos
    }
}

const HEAVY_BALL_RETRIES: u32 = 100;
const MAX_RESEEDS: u32 = 64;

impl EnvTemplate {
    pub fn from_json(text: &str) -> Result<Self, TemplateError> {
        let t: EnvTemplate = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self, TemplateError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("template serializes")
    }

    fn invalid(&self, reason: impl Into<String>) -> TemplateError {
        TemplateError::InvalidTemplate {
            name: self.name.clone(),
            reason: reason.into(),
        }
    }

    /// Base tiles from the layout, before any slot is filled.
    pub fn base_grid(&self) -> Result<Vec<Tile>, TemplateError> {
        if self.layout.len() != self.height {
            return Err(self.invalid(format!(
                "layout has {} rows, expected {}",
                self.layout.len(),
                self.height
            )));
        }
        let mut grid = Vec::with_capacity(self.width * self.height);
        for (y, row) in self.layout.iter().enumerate() {
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != self.width {
                return Err(self.invalid(format!(
                    "layout row {y} has {} columns, expected {}",
                    chars.len(),
                    self.width
                )));
            }
            for ch in chars {
                let t = self
                    .legend
                    .get(&ch)
                    .ok_or_else(|| self.invalid(format!("layout character {ch:?} not in legend")))?;
                grid.push(t.tile());
            }
        }
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), TemplateError> {
        if self.width == 0 || self.height == 0 {
            return Err(self.invalid("empty grid"));
        }
        let grid = self.base_grid()?;
        let in_bounds = |c: &CellCoord| c.x < self.width && c.y < self.height;
        let tile = |c: &CellCoord| grid[c.y * self.width + c.x];
        if self.agent_starts.is_empty() || self.agent_dirs.is_empty() || self.door_colors.is_empty()
        {
            return Err(self.invalid("agent start, direction and color slots must be non-empty"));
        }
        for c in &self.agent_starts {
            if !in_bounds(c) || tile(c) != Tile::Floor {
                return Err(self.invalid(format!("agent start {c} is not a floor cell")));
            }
        }
        let key_ids: BTreeSet<KeyId> = self.keys.iter().map(|k| k.id).collect();
        if key_ids.len() != self.keys.len() {
            return Err(self.invalid("duplicate key id"));
        }
        for k in &self.keys {
            if k.id.0 > KeyId::MAX {
                return Err(self.invalid(format!("key id {} exceeds {}", k.id.0, KeyId::MAX)));
            }
            if k.positions.is_empty() {
                return Err(self.invalid(format!("key {} has no positions", k.id.0)));
            }
            for c in &k.positions {
                if !in_bounds(c) || tile(c) != Tile::Floor {
                    return Err(self.invalid(format!("key position {c} is not a floor cell")));
                }
            }
        }
        for (i, d) in self.doors.iter().enumerate() {
            if d.positions.is_empty() {
                return Err(self.invalid(format!("door {i} has no positions")));
            }
            if d.positions.iter().any(|c| !in_bounds(c)) {
                return Err(self.invalid(format!("door {i} position out of bounds")));
            }
            let required: Vec<KeyId> = match &d.lock {
                DoorLock::Unlocked => vec![],
                DoorLock::Locked { key } => vec![*key],
                DoorLock::MultiLock { required } => {
                    if required.is_empty() {
                        return Err(self.invalid(format!("multi-lock door {i} requires no keys")));
                    }
                    required.clone()
                }
            };
            for k in required {
                if !key_ids.contains(&k) {
                    return Err(self.invalid(format!(
                        "door {i} requires key {} which no key slot provides",
                        k.0
                    )));
                }
            }
        }
        if self.variant.distractor_doors > self.distractor_cells.len() {
            return Err(self.invalid("more distractor doors than candidate cells"));
        }
        if self.distractor_cells.iter().any(|c| !in_bounds(c)) {
            return Err(self.invalid("distractor cell out of bounds"));
        }
        Ok(())
    }

    /// Draws a concrete instance. The same `(template, seed)` always yields
    /// the same instance.
    pub fn instantiate(&self, seed: u64) -> Result<EnvInstance, TemplateError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..MAX_RESEEDS {
            if let Some(initial) = self.try_instantiate(&mut rng)? {
                return Ok(EnvInstance {
                    template: self.name.clone(),
                    seed,
                    initial,
                });
            }
        }
        Err(TemplateError::PlacementFailed {
            name: self.name.clone(),
            attempts: MAX_RESEEDS,
        })
    }

    fn try_instantiate(&self, rng: &mut ChaCha8Rng) -> Result<Option<GameState>, TemplateError> {
        let w = self.width;
        let mut grid = self.base_grid()?;
        let idx = |c: CellCoord| c.y * w + c.x;

        let pos = *self.agent_starts.choose(rng).expect("validated non-empty");
        let dir = *self.agent_dirs.choose(rng).expect("validated non-empty");
        let mut taken: HashSet<CellCoord> = HashSet::from([pos]);

        let mut palette = self.door_colors.clone();
        palette.shuffle(rng);
        let color_at = |i: usize| palette[i % palette.len()];

        let mut key_colors: BTreeMap<KeyId, Color> = BTreeMap::new();
        for (i, slot) in self.doors.iter().enumerate() {
            let color = color_at(i);
            let free: Vec<CellCoord> = slot
                .positions
                .iter()
                .copied()
                .filter(|c| !taken.contains(c))
                .collect();
            let Some(&cell) = free.choose(rng) else {
                return Err(self.invalid(format!("door {i} has no free position")));
            };
            taken.insert(cell);
            grid[idx(cell)] = match &slot.lock {
                DoorLock::Unlocked => Tile::Door {
                    color,
                    open: false,
                    locked: false,
                },
                DoorLock::Locked { key } => {
                    key_colors.entry(*key).or_insert(color);
                    Tile::Door {
                        color,
                        open: false,
                        locked: true,
                    }
                }
                DoorLock::MultiLock { required } => {
                    for k in required {
                        key_colors.entry(*k).or_insert(color);
                    }
                    Tile::MultiLockDoor {
                        color,
                        required: required.iter().copied().collect::<KeySet>(),
                        applied: KeySet::EMPTY,
                        open: false,
                    }
                }
            };
        }

        for (i, slot) in self.keys.iter().enumerate() {
            let color = key_colors
                .get(&slot.id)
                .copied()
                .unwrap_or_else(|| color_at(self.doors.len() + i));
            let free: Vec<CellCoord> = slot
                .positions
                .iter()
                .copied()
                .filter(|c| !taken.contains(c) && grid[idx(*c)] == Tile::Floor)
                .collect();
            let Some(&cell) = free.choose(rng) else {
                return Ok(None);
            };
            taken.insert(cell);
            grid[idx(cell)] = Tile::Key { color, id: slot.id };
        }

        let mut candidates: Vec<CellCoord> = self
            .distractor_cells
            .iter()
            .copied()
            .filter(|c| !taken.contains(c))
            .collect();
        if candidates.len() < self.variant.distractor_doors {
            return Ok(None);
        }
        candidates.shuffle(rng);
        for &cell in candidates.iter().take(self.variant.distractor_doors) {
            let color = *Color::ALL.choose(rng).expect("non-empty");
            taken.insert(cell);
            grid[idx(cell)] = Tile::Door {
                color,
                open: false,
                locked: false,
            };
        }

        let mut state = GameState::new(
            w,
            self.height,
            grid,
            AgentState {
                pos,
                dir,
                carrying: None,
            },
        );
        for _ in 0..self.variant.heavy_balls {
            if !place_heavy_ball(&mut state, &taken, rng) {
                return Ok(None);
            }
        }
        Ok(Some(state))
    }

    /// Rotates the template a quarter turn clockwise: `(x, y)` maps to
    /// `(height - 1 - y, x)`.
    pub fn rotated_cw(&self) -> EnvTemplate {
        let (w, h) = (self.width, self.height);
        let rows: Vec<Vec<char>> = self.layout.iter().map(|r| r.chars().collect()).collect();
        let layout = (0..w)
            .map(|ny| (0..h).map(|nx| rows[h - 1 - nx][ny]).collect::<String>())
            .collect();
        let map = |c: &CellCoord| CellCoord::new(h - 1 - c.y, c.x);
        let mut out = self.map_cells(|c| Some(map(c)));
        out.width = h;
        out.height = w;
        out.layout = layout;
        out.agent_dirs = self.agent_dirs.iter().map(|d| d.right()).collect();
        out
    }

    /// Deletes column `col`, shifting everything right of it one cell left.
    /// Slot cells in the removed column are dropped.
    pub fn without_column(&self, col: usize) -> EnvTemplate {
        let layout = self
            .layout
            .iter()
            .map(|r| {
                r.chars()
                    .enumerate()
                    .filter(|(x, _)| *x != col)
                    .map(|(_, ch)| ch)
                    .collect()
            })
            .collect();
        let mut out = self.map_cells(|c| match c.x.cmp(&col) {
            std::cmp::Ordering::Less => Some(*c),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(CellCoord::new(c.x - 1, c.y)),
        });
        out.width = self.width - 1;
        out.layout = layout;
        out
    }

    fn map_cells(&self, f: impl Fn(&CellCoord) -> Option<CellCoord>) -> EnvTemplate {
        let map_all = |v: &[CellCoord]| v.iter().filter_map(&f).collect::<Vec<_>>();
        let mut out = self.clone();
        out.agent_starts = map_all(&self.agent_starts);
        out.distractor_cells = map_all(&self.distractor_cells);
        for d in &mut out.doors {
            d.positions = map_all(&d.positions);
        }
        for k in &mut out.keys {
            k.positions = map_all(&k.positions);
        }
        out
    }
}

/// Places one heavy ball on a free floor cell whose blocking removes no
/// reachable cell other than itself. Gives up after a bounded number of draws.
fn place_heavy_ball(state: &mut GameState, taken: &HashSet<CellCoord>, rng: &mut ChaCha8Rng) -> bool {
    let free: Vec<CellCoord> = state
        .cells()
        .filter(|(c, t)| *t == Tile::Floor && !taken.contains(c))
        .map(|(c, _)| c)
        .collect();
    if free.is_empty() {
        return false;
    }
    let before = open_region(state).len();
    for _ in 0..HEAVY_BALL_RETRIES {
        let cell = free[rng.gen_range(0..free.len())];
        let mut trial = state.clone();
        trial.set_tile(cell, Tile::HeavyBall);
        if open_region(&trial).len() + 1 == before {
            *state = trial;
            return true;
        }
    }
    false
}

/// Cells reachable from the agent treating every door as passable and
/// items as clearable; used only to keep obstacle placement connected.
fn open_region(state: &GameState) -> HashSet<CellCoord> {
    let passable = |t: Tile| !matches!(t, Tile::Wall | Tile::HeavyBall);
    let mut seen = HashSet::from([state.agent.pos]);
    let mut queue = VecDeque::from([state.agent.pos]);
    while let Some(c) = queue.pop_front() {
        for d in Direction::ALL {
            let (dx, dy) = d.delta();
            let (x, y) = (c.x as i64 + dx, c.y as i64 + dy);
            if let Some(t) = state.tile_at(x, y) {
                let n = CellCoord::new(x as usize, y as usize);
                if passable(t) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
    }
    seen
}
