//! Scripted demonstrators: deterministic stand-ins for a human player.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::clone::{Author, Trajectory};
use crate::gridworld::{Action, CellCoord, Direction, EnvInstance, GameState, Item, StepError, Tile};

#[derive(Debug, Error, PartialEq)]
pub enum DemoError {
    #[error("no path to {0}")]
    Unreachable(CellCoord),
    #[error("no free cell to drop the carried item")]
    NowhereToDrop,
    #[error("door at {0} cannot be unlocked with the keys in reach")]
    Stuck(CellCoord),
    #[error("step budget of {0} exhausted")]
    Budget(usize),
    #[error(transparent)]
    Step(#[from] StepError),
}

type Pose = (CellCoord, Direction);

/// Plays actions on a running state and records them.
pub struct Script {
    trajectory: Trajectory,
    state: GameState,
    max_steps: usize,
}

impl Script {
    pub fn new(instance: &EnvInstance, max_steps: usize) -> Self {
        Script {
            trajectory: Trajectory::empty(instance, Author::Scripted),
            state: instance.initial.clone(),
            max_steps,
        }
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn act(&mut self, a: Action) -> Result<(), DemoError> {
        if self.trajectory.len() >= self.max_steps {
            return Err(DemoError::Budget(self.max_steps));
        }
        self.state = self.trajectory.push(&self.state, a)?;
        Ok(())
    }

    /// Turn/forward plan over poses to the first pose satisfying `goal`.
    /// Closed plain doors count as passable; they are opened on the way.
    fn plan(&self, goal: impl Fn(Pose) -> bool) -> Option<Vec<Action>> {
        let s = &self.state;
        let start = (s.agent.pos, s.agent.dir);
        let mut prev: HashMap<Pose, (Pose, Action)> = HashMap::new();
        let mut queue = VecDeque::from([start]);
        let mut seen = std::collections::HashSet::from([start]);
        while let Some(p) = queue.pop_front() {
            if goal(p) {
                let mut out = Vec::new();
                let mut cur = p;
                while let Some(&(q, a)) = prev.get(&cur) {
                    out.push(a);
                    cur = q;
                }
                out.reverse();
                return Some(out);
            }
            let (c, d) = p;
            let mut next = vec![((c, d.left()), Action::Left), ((c, d.right()), Action::Right)];
            let (dx, dy) = d.delta();
            if let Some(t) = s.tile_at(c.x as i64 + dx, c.y as i64 + dy) {
                if walkable(t) {
                    let n = CellCoord::new((c.x as i64 + dx) as usize, (c.y as i64 + dy) as usize);
                    next.push(((n, d), Action::Forward));
                }
            }
            for (q, a) in next {
                if seen.insert(q) {
                    prev.insert(q, (p, a));
                    queue.push_back(q);
                }
            }
        }
        None
    }

    fn follow(&mut self, plan: Vec<Action>) -> Result<(), DemoError> {
        for a in plan {
            if a == Action::Forward {
                if let Some(c) = self.state.front_cell() {
                    if matches!(self.state.tile(c), Tile::Door { open: false, locked: false, .. }) {
                        self.act(Action::Toggle)?;
                    }
                }
            }
            self.act(a)?;
        }
        Ok(())
    }

    pub fn goto(&mut self, cell: CellCoord) -> Result<(), DemoError> {
        let plan = self.plan(|(c, _)| c == cell).ok_or(DemoError::Unreachable(cell))?;
        self.follow(plan)
    }

    /// Moves next to `cell` and faces it.
    pub fn face(&mut self, cell: CellCoord) -> Result<(), DemoError> {
        let plan = self
            .plan(|(c, d)| {
                let (dx, dy) = d.delta();
                c.x as i64 + dx == cell.x as i64 && c.y as i64 + dy == cell.y as i64
            })
            .ok_or(DemoError::Unreachable(cell))?;
        self.follow(plan)
    }

    pub fn pick_up_at(&mut self, cell: CellCoord) -> Result<(), DemoError> {
        self.face(cell)?;
        self.act(Action::Pickup)
    }

    /// Drops the carried item on the nearest floor cell that is not beside a
    /// door and not in `keep_clear`.
    pub fn drop_item(&mut self, keep_clear: &[CellCoord]) -> Result<(), DemoError> {
        let s = &self.state;
        let near_door = |x: i64, y: i64| {
            Direction::ALL.iter().any(|d| {
                let (dx, dy) = d.delta();
                s.tile_at(x + dx, y + dy).is_some_and(Tile::is_door)
            })
        };
        let ok = |(c, d): Pose| {
            let (dx, dy) = d.delta();
            let (x, y) = (c.x as i64 + dx, c.y as i64 + dy);
            s.tile_at(x, y) == Some(Tile::Floor)
                && !near_door(x, y)
                && !keep_clear.contains(&CellCoord::new(x as usize, y as usize))
        };
        let plan = self.plan(ok).ok_or(DemoError::NowhereToDrop)?;
        self.follow(plan)?;
        self.act(Action::Drop)
    }

    pub fn finish(self) -> Trajectory {
        self.trajectory
    }
}

fn walkable(t: Tile) -> bool {
    t.occupiable() || matches!(t, Tile::Door { open: false, locked: false, .. })
}

fn find(s: &GameState, pred: impl Fn(Tile) -> bool) -> Vec<CellCoord> {
    s.cells().filter(|(_, t)| pred(*t)).map(|(c, _)| c).collect()
}

/// Greedy tour: repeatedly walk to the closest unvisited walkable cell until
/// `max_cells` distinct cells have been occupied or nothing else is reachable.
pub fn coverage_tour(instance: &EnvInstance, max_cells: usize, max_steps: usize) -> Result<Trajectory, DemoError> {
    route_tour(instance, &[], max_cells, max_steps)
}

/// Walks through `waypoints` in order, then continues as [`coverage_tour`]
/// until `max_cells` cells are covered. The waypoint leg is never cut short.
pub fn route_tour(
    instance: &EnvInstance,
    waypoints: &[CellCoord],
    max_cells: usize,
    max_steps: usize,
) -> Result<Trajectory, DemoError> {
    let mut sc = Script::new(instance, max_steps);
    let mut visited = std::collections::HashSet::from([instance.start()]);
    let track = |sc: &Script, visited: &mut std::collections::HashSet<CellCoord>, from: usize| {
        for st in sc.trajectory.states(instance).unwrap().iter().skip(from) {
            visited.insert(st.agent.pos);
        }
    };
    for &w in waypoints {
        let before = sc.trajectory.len();
        sc.goto(w)?;
        track(&sc, &mut visited, before);
    }
    while visited.len() < max_cells {
        let v = visited.clone();
        let Some(plan) = sc.plan(|(c, _)| !v.contains(&c)) else {
            break;
        };
        let before = sc.trajectory.len();
        sc.follow(plan)?;
        track(&sc, &mut visited, before);
    }
    Ok(sc.finish())
}

/// Right-hand wall follower: turn right when the right side is open, go
/// forward when the front is open (opening plain doors), otherwise turn left.
pub fn wall_follow(instance: &EnvInstance, steps: usize) -> Trajectory {
    let mut sc = Script::new(instance, steps);
    // Walk straight until something is ahead, then keep it on the right.
    while sc.state.front_cell().is_some_and(|c| sc.state.tile(c).occupiable()) && sc.trajectory.len() < steps {
        if sc.act(Action::Forward).is_err() {
            break;
        }
    }
    let _ = sc.act(Action::Left);
    while sc.trajectory.len() < steps {
        let s = &sc.state;
        let ahead = |d: Direction| {
            let (dx, dy) = d.delta();
            s.tile_at(s.agent.pos.x as i64 + dx, s.agent.pos.y as i64 + dy)
        };
        let front = ahead(s.agent.dir);
        let right = ahead(s.agent.dir.right());
        let last = sc.trajectory.steps.last().map(|st| st.action);
        let a = if matches!(front, Some(Tile::Door { open: false, locked: false, .. })) {
            Action::Toggle
        } else if right.is_some_and(walkable) && last != Some(Action::Right) {
            Action::Right
        } else if front.is_some_and(|t| t.occupiable()) {
            Action::Forward
        } else {
            Action::Left
        };
        if sc.act(a).is_err() {
            break;
        }
    }
    sc.finish()
}

/// Opens every door standing between the start and the goal (fetching and
/// applying keys as needed), then walks onto the goal.
pub fn playthrough(instance: &EnvInstance, max_steps: usize) -> Result<Trajectory, DemoError> {
    let mut sc = Script::new(instance, max_steps);
    let goal = *find(&instance.initial, |t| t == Tile::Goal)
        .first()
        .ok_or(DemoError::Unreachable(instance.start()))?;
    loop {
        if let Some(plan) = sc.plan(|(c, _)| c == goal) {
            sc.follow(plan)?;
            return Ok(sc.finish());
        }
        // Nearest closed locked door we can walk up to.
        let locked = find(&sc.state, |t| {
            matches!(t, Tile::Door { locked: true, .. } | Tile::MultiLockDoor { open: false, .. })
        });
        let door = locked
            .iter()
            .filter_map(|&d| sc.plan(|(c, dir)| faces(c, dir, d)).map(|p| (p.len(), d)))
            .min()
            .map(|(_, d)| d);
        match door {
            Some(d) => unlock(&mut sc, d)?,
            // An item may be standing in a doorway; carry it off.
            None => {
                let items = find(&sc.state, |t| t.item().is_some());
                let Some(&item) = items.iter().find(|&&k| sc.plan(|(c, d)| faces(c, d, k)).is_some()) else {
                    return Err(DemoError::Unreachable(goal));
                };
                if sc.state.agent.carrying.is_some() {
                    sc.drop_item(&[item])?;
                }
                sc.pick_up_at(item)?;
            }
        }
    }
}

fn faces(c: CellCoord, d: Direction, target: CellCoord) -> bool {
    let (dx, dy) = d.delta();
    c.x as i64 + dx == target.x as i64 && c.y as i64 + dy == target.y as i64
}

fn fetch_key(sc: &mut Script, want: impl Fn(Item) -> bool, door: CellCoord) -> Result<(), DemoError> {
    if sc.state.agent.carrying.is_some_and(&want) {
        return Ok(());
    }
    let here = find(&sc.state, |t| t.item().is_some_and(&want));
    let Some(&key) = here.iter().find(|&&k| sc.plan(|(c, d)| faces(c, d, k)).is_some()) else {
        return Err(DemoError::Stuck(door));
    };
    if sc.state.agent.carrying.is_some() {
        let approach: Vec<CellCoord> = vec![key, door];
        sc.drop_item(&approach)?;
    }
    sc.pick_up_at(key)
}

fn unlock(sc: &mut Script, door: CellCoord) -> Result<(), DemoError> {
    match sc.state.tile(door) {
        Tile::Door { color, .. } => {
            fetch_key(sc, |i| matches!(i, Item::Key { color: kc, .. } if kc == color), door)?;
            sc.face(door)?;
            sc.act(Action::Toggle)
        }
        Tile::MultiLockDoor { required, .. } => {
            for id in required.iter() {
                if let Tile::MultiLockDoor { applied, .. } = sc.state.tile(door) {
                    if applied.contains(id) {
                        continue;
                    }
                }
                fetch_key(sc, |i| matches!(i, Item::Key { id: k, .. } if k == id), door)?;
                sc.face(door)?;
                sc.act(Action::Toggle)?;
            }
            sc.face(door)?;
            sc.act(Action::Toggle)?;
            match sc.state.tile(door) {
                Tile::MultiLockDoor { open: true, .. } => Ok(()),
                _ => Err(DemoError::Stuck(door)),
            }
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clone::replay_verify;
    use crate::gridworld::catalog;
    use crate::state_space::ground_truth_cells;

    fn cells(t: &Trajectory, inst: &EnvInstance) -> usize {
        let mut v: std::collections::HashSet<_> = t.states(inst).unwrap().iter().map(|s| s.agent.pos).collect();
        v.insert(inst.start());
        v.len()
    }

    #[test]
    fn tour_stops_at_the_cell_budget() {
        for seed in 0..5 {
            let inst = catalog::dual_hallway().instantiate(seed).unwrap();
            let t = coverage_tour(&inst, 60, 2000).unwrap();
            assert_eq!(cells(&t, &inst), 60);
            assert!(replay_verify(&t).unwrap());
        }
    }

    #[test]
    fn full_tour_reaches_ground_truth() {
        let inst = catalog::dual_hallway().instantiate(3).unwrap();
        let t = coverage_tour(&inst, usize::MAX, 5000).unwrap();
        assert_eq!(cells(&t, &inst) as u32, ground_truth_cells(&inst).count);
    }

    #[test]
    fn playthrough_opens_both_locks() {
        for seed in 0..10 {
            let inst = catalog::cascading_lock_door().instantiate(seed).unwrap();
            let t = playthrough(&inst, 1000).unwrap();
            let last = t.states(&inst).unwrap().pop().unwrap();
            assert_eq!(last.tile(last.agent.pos), Tile::Goal, "seed {seed}");
        }
    }

    #[test]
    fn wall_follower_crosses_to_the_far_room() {
        let inst = catalog::dual_hallway().instantiate(1).unwrap();
        let t = wall_follow(&inst, 300);
        assert!(t.states(&inst).unwrap().iter().any(|s| s.agent.pos.x > 8));
    }
}
