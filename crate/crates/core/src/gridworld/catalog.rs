//! Built-in environment templates.
//!
//! Each full-size template also ships as a JSON file under `templates/`;
//! the miniatures are small enough for exhaustive state enumeration.

use super::template::{default_legend, DoorLock, DoorSlot, EnvTemplate, KeySlot, Variant};
use super::types::{CellCoord, Color, Direction, KeyId};

pub const DUAL_HALLWAY: &str = "DualHallway";
pub const SIDEWAYS_DUAL_HALLWAY: &str = "SidewaysDualHallway";
pub const DUAL_HALLWAY_DISTRACTORS: &str = "DualHallway+Distractors";
pub const DUAL_HALLWAY_OBSTACLES: &str = "DualHallway+Distractors&Obstacles";
pub const CASCADING_LOCK_DOOR: &str = "CascadingLockDoor";

/// The five experiment setups, in a fixed order.
pub fn catalog() -> Vec<EnvTemplate> {
    vec![
        dual_hallway(),
        sideways_dual_hallway(),
        dual_hallway_distractors(),
        dual_hallway_obstacles(),
        cascading_lock_door(),
    ]
}

/// Shrunken counterparts of the catalog (at most 9 cells on a side).
pub fn miniatures() -> Vec<EnvTemplate> {
    vec![
        mini_dual_hallway(),
        mini_sideways(),
        mini_distractors(),
        mini_obstacles(),
        mini_cascading(),
    ]
}

pub fn by_name(name: &str) -> Option<EnvTemplate> {
    catalog()
        .into_iter()
        .chain(miniatures())
        .find(|t| t.name == name)
}

/// File stem used for the shipped JSON copy of a template.
pub fn file_stem(name: &str) -> String {
    let mut out = String::new();
    for (i, ch) in name.chars().enumerate() {
        match ch {
            '+' | '&' => out.push('_'),
            c if c.is_ascii_uppercase() => {
                if i > 0 && !out.ends_with('_') {
                    out.push('_');
                }
                out.push(c.to_ascii_lowercase());
            }
            c => out.push(c),
        }
    }
    out
}

fn cells(xs: impl IntoIterator<Item = usize>, ys: impl IntoIterator<Item = usize> + Clone) -> Vec<CellCoord> {
    let mut v = Vec::new();
    for x in xs {
        for y in ys.clone() {
            v.push(CellCoord::new(x, y));
        }
    }
    v.sort_by_key(|c| (c.y, c.x));
    v
}

fn rows(layout: &[&str]) -> Vec<String> {
    layout.iter().map(|r| r.to_string()).collect()
}

fn unlocked(positions: Vec<CellCoord>) -> DoorSlot {
    DoorSlot {
        positions,
        lock: DoorLock::Unlocked,
    }
}

/// Two 5×9 rooms joined by two three-cell hallways, each holding one
/// closed door at a random position along the hallway.
pub fn dual_hallway() -> EnvTemplate {
    EnvTemplate {
        name: DUAL_HALLWAY.into(),
        width: 15,
        height: 11,
        legend: default_legend(),
        layout: rows(&[
            "###############",
            "#.....###.....#",
            "#.............#",
            "#.....###.....#",
            "#.....###.....#",
            "#.....###....G#",
            "#.....###.....#",
            "#.....###.....#",
            "#.............#",
            "#.....###.....#",
            "###############",
        ]),
        agent_starts: cells(1..=5, 1..=9),
        agent_dirs: Direction::ALL.to_vec(),
        door_colors: Color::ALL.to_vec(),
        doors: vec![
            unlocked(cells(6..=8, [2])),
            unlocked(cells(6..=8, [8])),
        ],
        keys: vec![],
        distractor_cells: vec![],
        variant: Variant::default(),
    }
}

/// Middle-wall faces that may receive distractor doors.
fn dual_hallway_distractor_cells() -> Vec<CellCoord> {
    cells([6, 8], [1, 3, 4, 5, 6, 7, 9])
}

pub fn dual_hallway_distractors() -> EnvTemplate {
    let mut t = dual_hallway();
    t.name = DUAL_HALLWAY_DISTRACTORS.into();
    t.distractor_cells = dual_hallway_distractor_cells();
    t.variant.distractor_doors = 5;
    t
}

pub fn dual_hallway_obstacles() -> EnvTemplate {
    let mut t = dual_hallway_distractors();
    t.name = DUAL_HALLWAY_OBSTACLES.into();
    t.variant.heavy_balls = 5;
    t
}

/// DualHallway turned a quarter clockwise with one interior column removed
/// (the column that held the rooms' sixth row).
pub fn sideways_dual_hallway() -> EnvTemplate {
    let mut t = dual_hallway().rotated_cw().without_column(SIDEWAYS_REMOVED_COLUMN);
    t.name = SIDEWAYS_DUAL_HALLWAY.into();
    t.variant.sideways = true;
    t
}

/// Column of the rotated DualHallway dropped when narrowing it.
pub const SIDEWAYS_REMOVED_COLUMN: usize = 4;

/// Two 4×5 rooms in sequence behind multi-lock doors, then a goal alcove.
/// Door 1 needs key 0; door 2 needs keys 0 and 1.
pub fn cascading_lock_door() -> EnvTemplate {
    EnvTemplate {
        name: CASCADING_LOCK_DOOR.into(),
        width: 13,
        height: 7,
        legend: default_legend(),
        layout: rows(&[
            "#############",
            "#....#....#.#",
            "#....#....#.#",
            "#....#....#G#",
            "#....#....#.#",
            "#....#....#.#",
            "#############",
        ]),
        agent_starts: cells(1..=4, 1..=5),
        agent_dirs: Direction::ALL.to_vec(),
        door_colors: Color::ALL.to_vec(),
        doors: vec![
            DoorSlot {
                positions: cells([5], 1..=5),
                lock: DoorLock::MultiLock {
                    required: vec![KeyId(0)],
                },
            },
            DoorSlot {
                positions: cells([10], 1..=5),
                lock: DoorLock::MultiLock {
                    required: vec![KeyId(0), KeyId(1)],
                },
            },
        ],
        keys: vec![
            KeySlot {
                id: KeyId(0),
                positions: cells(1..=4, 1..=5),
            },
            KeySlot {
                id: KeyId(1),
                positions: cells(6..=9, 1..=5),
            },
        ],
        distractor_cells: vec![],
        variant: Variant::default(),
    }
}

pub fn mini_dual_hallway() -> EnvTemplate {
    EnvTemplate {
        name: "MiniDualHallway".into(),
        width: 9,
        height: 7,
        legend: default_legend(),
        layout: rows(&[
            "#########",
            "#.......#",
            "#..###..#",
            "#..###.G#",
            "#..###..#",
            "#.......#",
            "#########",
        ]),
        agent_starts: cells(1..=2, 1..=5),
        agent_dirs: Direction::ALL.to_vec(),
        door_colors: Color::ALL.to_vec(),
        doors: vec![unlocked(cells(3..=5, [1])), unlocked(cells(3..=5, [5]))],
        keys: vec![],
        distractor_cells: vec![],
        variant: Variant::default(),
    }
}

pub fn mini_sideways() -> EnvTemplate {
    let mut t = mini_dual_hallway().rotated_cw().without_column(2);
    t.name = "MiniSidewaysDualHallway".into();
    t.variant.sideways = true;
    t
}

pub fn mini_distractors() -> EnvTemplate {
    let mut t = mini_dual_hallway();
    t.name = "MiniDualHallway+Distractors".into();
    t.distractor_cells = cells([3, 5], 2..=4);
    t.variant.distractor_doors = 5;
    t
}

pub fn mini_obstacles() -> EnvTemplate {
    let mut t = mini_distractors();
    t.name = "MiniDualHallway+Distractors&Obstacles".into();
    t.variant.heavy_balls = 3;
    t
}

pub fn mini_cascading() -> EnvTemplate {
    EnvTemplate {
        name: "MiniCascadingLockDoor".into(),
        width: 9,
        height: 5,
        legend: default_legend(),
        layout: rows(&[
            "#########",
            "#..#..#.#",
            "#..#..#G#",
            "#..#..#.#",
            "#########",
        ]),
        agent_starts: cells(1..=2, 1..=3),
        agent_dirs: Direction::ALL.to_vec(),
        door_colors: Color::ALL.to_vec(),
        doors: vec![
            DoorSlot {
                positions: cells([3], 1..=3),
                lock: DoorLock::MultiLock {
                    required: vec![KeyId(0)],
                },
            },
            DoorSlot {
                positions: cells([6], 1..=3),
                lock: DoorLock::MultiLock {
                    required: vec![KeyId(0), KeyId(1)],
                },
            },
        ],
        keys: vec![
            KeySlot {
                id: KeyId(0),
                positions: cells(1..=2, 1..=3),
            },
            KeySlot {
                id: KeyId(1),
                positions: cells(4..=5, 1..=3),
            },
        ],
        distractor_cells: vec![],
        variant: Variant::default(),
    }
}
