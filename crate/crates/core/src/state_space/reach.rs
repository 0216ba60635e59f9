//! Ground-truth reachable cells: a door/key fixpoint, and an exhaustive
//! state-space BFS used to check it.

use std::collections::{BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use super::hash::config_hash;
use crate::gridworld::{step, Action, CellCoord, Direction, EnvInstance, GameState, Tile};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub count: u32,
    pub cells: BTreeSet<CellCoord>,
}

impl GroundTruth {
    /// Cells as an ASCII map: `o` reachable, `#` wall, `.` anything else.
    pub fn cell_map(&self, instance: &EnvInstance) -> String {
        let s = &instance.initial;
        let mut out = String::new();
        for y in 0..s.height() {
            for x in 0..s.width() {
                let c = CellCoord::new(x, y);
                out.push(if self.cells.contains(&c) {
                    'o'
                } else if s.tile(c) == Tile::Wall {
                    '#'
                } else {
                    '.'
                });
            }
            out.push('\n');
        }
        out
    }
}

/// Upper bound on map cells the agent can ever occupy.
///
/// Flood fill from the start treating closed unlocked doors as passable and
/// locked doors as walls. A locked door becomes passable once every key it
/// needs lies inside the current region; repeat until nothing changes.
/// Heavy balls are never passable.
pub fn ground_truth_cells(instance: &EnvInstance) -> GroundTruth {
    let s = &instance.initial;
    let mut unlocked: HashSet<CellCoord> = HashSet::new();
    loop {
        let region = flood(s, &unlocked);
        let mut changed = false;
        for (c, t) in s.cells() {
            if unlocked.contains(&c) {
                continue;
            }
            let opens = match t {
                Tile::Door {
                    color,
                    locked: true,
                    open: false,
                } => region
                    .iter()
                    .any(|r| matches!(s.tile(*r), Tile::Key { color: kc, .. } if kc == color)),
                Tile::MultiLockDoor {
                    required,
                    applied,
                    open: false,
                    ..
                } => required.iter().all(|k| {
                    applied.contains(k)
                        || region
                            .iter()
                            .any(|r| matches!(s.tile(*r), Tile::Key { id, .. } if id == k))
                }),
                _ => false,
            };
            if opens {
                unlocked.insert(c);
                changed = true;
            }
        }
        if !changed {
            let cells: BTreeSet<CellCoord> = region.into_iter().collect();
            return GroundTruth {
                count: cells.len() as u32,
                cells,
            };
        }
    }
}

fn passable(t: Tile, c: CellCoord, unlocked: &HashSet<CellCoord>) -> bool {
    match t {
        Tile::Floor | Tile::Goal | Tile::Key { .. } | Tile::Ball { .. } => true,
        Tile::Door { locked, open, .. } => open || !locked || unlocked.contains(&c),
        Tile::MultiLockDoor { open, .. } => open || unlocked.contains(&c),
        Tile::Wall | Tile::HeavyBall => false,
    }
}

fn flood(s: &GameState, unlocked: &HashSet<CellCoord>) -> HashSet<CellCoord> {
    let start = s.agent.pos;
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for d in Direction::ALL {
            let (dx, dy) = d.delta();
            let (x, y) = (c.x as i64 + dx, c.y as i64 + dy);
            let Some(t) = s.tile_at(x, y) else { continue };
            let n = CellCoord::new(x as usize, y as usize);
            if passable(t, n, unlocked) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error("state space exceeds the cap of {cap} expanded states")]
    CapExceeded { cap: usize },
}

/// Exhaustive BFS over complete game states (all seven actions from every
/// non-done state, deduplicated by configuration hash), projected to agent cells.
pub fn brute_force_reachable(
    instance: &EnvInstance,
    state_cap: usize,
) -> Result<BTreeSet<CellCoord>, ReachError> {
    let mut seen = HashSet::from([config_hash(&instance.initial)]);
    let mut queue = VecDeque::from([instance.initial.clone()]);
    let mut cells = BTreeSet::from([instance.initial.agent.pos]);
    let mut expanded = 0usize;
    while let Some(s) = queue.pop_front() {
        if s.done {
            continue;
        }
        expanded += 1;
        if expanded > state_cap {
            return Err(ReachError::CapExceeded { cap: state_cap });
        }
        for a in Action::ALL {
            let (next, _) = step(&s, a).expect("state is not done");
            if seen.insert(config_hash(&next)) {
                cells.insert(next.agent.pos);
                queue.push_back(next);
            }
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{
        default_legend, AgentState, Color, DoorLock, DoorSlot, EnvTemplate, KeyId, KeySlot,
        Variant,
    };

    fn template(name: &str, layout: &[&str], start: CellCoord) -> EnvTemplate {
        EnvTemplate {
            name: name.into(),
            width: layout[0].len(),
            height: layout.len(),
            legend: default_legend(),
            layout: layout.iter().map(|s| s.to_string()).collect(),
            agent_starts: vec![start],
            agent_dirs: vec![Direction::East],
            door_colors: vec![Color::Red, Color::Blue],
            doors: vec![],
            keys: vec![],
            distractor_cells: vec![],
            variant: Variant::default(),
        }
    }

    fn open_grid(w: usize, h: usize) -> EnvInstance {
        EnvInstance {
            template: "open".into(),
            seed: 0,
            initial: GameState::new(
                w,
                h,
                vec![Tile::Floor; w * h],
                AgentState {
                    pos: CellCoord::new(0, 0),
                    dir: Direction::East,
                    carrying: None,
                },
            ),
        }
    }

    #[test]
    fn empty_room_is_fully_reachable() {
        assert_eq!(ground_truth_cells(&open_grid(5, 5)).count, 25);
        assert_eq!(brute_force_reachable(&open_grid(3, 3), 10_000).unwrap().len(), 9);
    }

    #[test]
    fn key_behind_its_own_lock_stays_locked() {
        let mut t = template(
            "KeyBehindLock",
            &["#######", "#..#..#", "#..#..#", "#######"],
            CellCoord::new(1, 1),
        );
        t.doors.push(DoorSlot {
            positions: vec![CellCoord::new(3, 1)],
            lock: DoorLock::Locked { key: KeyId(0) },
        });
        t.keys.push(KeySlot {
            id: KeyId(0),
            positions: vec![CellCoord::new(5, 2)],
        });
        let inst = t.instantiate(0).unwrap();
        let gt = ground_truth_cells(&inst);
        assert_eq!(gt.count, 4);
        assert!(gt.cells.iter().all(|c| c.x < 3));
        assert_eq!(brute_force_reachable(&inst, 100_000).unwrap(), gt.cells);
    }

    #[test]
    fn heavy_ball_line_splits_the_room() {
        let t = template(
            "BallLine",
            &["#######", "#..O..#", "#..O..#", "#..O..#", "#######"],
            CellCoord::new(1, 1),
        );
        let inst = t.instantiate(0).unwrap();
        let bf = brute_force_reachable(&inst, 100_000).unwrap();
        assert_eq!(bf.len(), 6);
        assert_eq!(ground_truth_cells(&inst).cells, bf);
    }

    #[test]
    fn tiny_cascading_matches_oracle() {
        let mut t = template(
            "TinyCascade",
            &["#########", "#..#..#.#", "#..#..#.#", "#..#..#.#", "#########"],
            CellCoord::new(1, 1),
        );
        t.doors = vec![
            DoorSlot {
                positions: vec![CellCoord::new(3, 2)],
                lock: DoorLock::MultiLock {
                    required: vec![KeyId(1)],
                },
            },
            DoorSlot {
                positions: vec![CellCoord::new(6, 2)],
                lock: DoorLock::MultiLock {
                    required: vec![KeyId(1), KeyId(2)],
                },
            },
        ];
        t.keys = vec![
            KeySlot {
                id: KeyId(1),
                positions: vec![CellCoord::new(2, 3)],
            },
            KeySlot {
                id: KeyId(2),
                positions: vec![CellCoord::new(5, 1)],
            },
        ];
        let inst = t.instantiate(0).unwrap();
        let gt = ground_truth_cells(&inst);
        let bf = brute_force_reachable(&inst, 2_000_000).unwrap();
        assert_eq!(gt.count as usize, bf.len());
        assert_eq!(gt.cells, bf);
        assert_eq!(gt.count, 6 + 1 + 6 + 1 + 3);
    }

    #[test]
    fn oracle_reports_cap() {
        assert_eq!(
            brute_force_reachable(&open_grid(6, 6), 10),
            Err(ReachError::CapExceeded { cap: 10 })
        );
    }
}
