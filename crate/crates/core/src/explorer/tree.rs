use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gridworld::{Action, CellCoord, Direction, GameState};

#[derive(Clone, Debug, PartialEq)]
pub struct RrtNode {
    pub id: usize,
    pub state: GameState,
    pub parent: Option<usize>,
    pub action_in: Option<Action>,
    pub iteration_added: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetConfig {
    pub cell: CellCoord,
    pub dir: Direction,
}

/// Which node wins when several sit at the same minimal distance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Oldest node. Newer nodes sharing a pose with an older one are never
    /// chosen, so state changes made in place (a toggled door, a picked-up
    /// key) cannot be built upon.
    LowestId,
    /// Uniform over the tied nodes.
    #[default]
    Random,
}

/// `|Δx| + |Δy| + rotation_cost · (quarter turns between directions)`.
pub fn distance(cell: CellCoord, dir: Direction, target: &TargetConfig, rotation_cost: f64) -> f64 {
    cell.manhattan(target.cell) as f64 + rotation_cost * dir.rotation_steps(target.dir) as f64
}

/// One line of the JSONL tree dump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub action_in: Option<Action>,
    pub cell: CellCoord,
    pub dir: Direction,
    pub iteration_added: u64,
}

/// Exploration tree. Nodes are bucketed by pose (cell and direction) so a
/// nearest query costs one distance evaluation per occupied pose; done
/// nodes are kept in the tree but never indexed.
#[derive(Clone, Debug)]
pub struct RrtTree {
    nodes: Vec<RrtNode>,
    width: usize,
    buckets: Vec<Vec<usize>>,
    occupied: Vec<usize>,
}

impl RrtTree {
    pub fn new(root: GameState) -> Self {
        let (w, h) = (root.width(), root.height());
        let mut t = RrtTree {
            nodes: Vec::new(),
            width: w,
            buckets: vec![Vec::new(); w * h * 4],
            occupied: Vec::new(),
        };
        t.insert(root, None, None, 0);
        t
    }

    fn pose_key(&self, s: &GameState) -> usize {
        (s.agent.pos.y * self.width + s.agent.pos.x) * 4 + s.agent.dir.id() as usize
    }

    fn insert(&mut self, state: GameState, parent: Option<usize>, action_in: Option<Action>, iteration: u64) -> usize {
        let id = self.nodes.len();
        if !state.done {
            let key = self.pose_key(&state);
            if self.buckets[key].is_empty() {
                self.occupied.push(key);
            }
            self.buckets[key].push(id);
        }
        self.nodes.push(RrtNode {
            id,
            state,
            parent,
            action_in,
            iteration_added: iteration,
        });
        id
    }

    /// Appends a child of `parent` reached by `action`.
    pub fn add_child(&mut self, parent: usize, action: Action, state: GameState, iteration: u64) -> usize {
        assert!(parent < self.nodes.len(), "parent {parent} not in tree");
        self.insert(state, Some(parent), Some(action), iteration)
    }

    pub fn root(&self) -> &RrtNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> Option<&RrtNode> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> &[RrtNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Closest non-done node to `target`, or `None` when every node is done.
    pub fn nearest<R: Rng>(&self, target: &TargetConfig, rotation_cost: f64, tie: TieBreak, rng: &mut R) -> Option<usize> {
        let mut best = f64::INFINITY;
        let mut tied: Vec<usize> = Vec::new();
        for &key in &self.occupied {
            let cell = key / 4;
            let c = CellCoord::new(cell % self.width, cell / self.width);
            let dir = Direction::from_id((key % 4) as u8).unwrap();
            let d = distance(c, dir, target, rotation_cost);
            if d < best {
                best = d;
                tied.clear();
            }
            if d == best {
                tied.push(key);
            }
        }
        match tie {
            TieBreak::LowestId => tied.iter().map(|&k| self.buckets[k][0]).min(),
            TieBreak::Random => {
                let total: usize = tied.iter().map(|&k| self.buckets[k].len()).sum();
                if total == 0 {
                    return None;
                }
                // Walk buckets in id order of their first node so the draw
                // does not depend on pose discovery order.
                tied.sort_by_key(|&k| self.buckets[k][0]);
                let mut r = rng.gen_range(0..total);
                for &k in &tied {
                    let b = &self.buckets[k];
                    if r < b.len() {
                        return Some(b[r]);
                    }
                    r -= b.len();
                }
                unreachable!()
            }
        }
    }

    /// Actions leading from the root to `id`.
    pub fn path_to(&self, id: usize) -> Vec<Action> {
        let mut out = Vec::new();
        let mut cur = id;
        while let Some(n) = self.nodes.get(cur) {
            match (n.parent, n.action_in) {
                (Some(p), Some(a)) => {
                    out.push(a);
                    cur = p;
                }
                _ => break,
            }
        }
        out.reverse();
        out
    }

    pub fn records(&self) -> impl Iterator<Item = NodeRecord> + '_ {
        self.nodes.iter().map(|n| NodeRecord {
            id: n.id,
            parent: n.parent,
            action_in: n.action_in,
            cell: n.state.agent.pos,
            dir: n.state.agent.dir,
            iteration_added: n.iteration_added,
        })
    }

    /// One JSON object per line, in id order.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in self.records() {
            serde_json::to_writer(&mut w, &r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{catalog, step};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    #[test]
    fn single_node_is_nearest() {
        let s = catalog::dual_hallway().instantiate(1).unwrap().initial;
        let t = RrtTree::new(s);
        let target = TargetConfig {
            cell: CellCoord::new(13, 9),
            dir: Direction::North,
        };
        assert_eq!(t.nearest(&target, 0.5, TieBreak::LowestId, &mut rng()), Some(0));
        assert_eq!(t.nearest(&target, 0.5, TieBreak::Random, &mut rng()), Some(0));
    }

    #[test]
    fn exact_pose_wins_and_ties_go_low() {
        let s = catalog::dual_hallway().instantiate(1).unwrap().initial;
        let mut t = RrtTree::new(s.clone());
        let (l, _) = step(&s, Action::Left).unwrap();
        let (r, _) = step(&s, Action::Right).unwrap();
        let a = t.add_child(0, Action::Left, l.clone(), 1);
        let b = t.add_child(0, Action::Right, r, 2);
        let exact = TargetConfig {
            cell: l.agent.pos,
            dir: l.agent.dir,
        };
        assert_eq!(t.nearest(&exact, 0.5, TieBreak::LowestId, &mut rng()), Some(a));
        // Opposite of the root's heading is one quarter turn from both children.
        let back = TargetConfig {
            cell: s.agent.pos,
            dir: s.agent.dir.left().left(),
        };
        assert_eq!(t.nearest(&back, 0.5, TieBreak::LowestId, &mut rng()), Some(a.min(b)));
        let mut seen = std::collections::BTreeSet::new();
        let mut g = rng();
        for _ in 0..100 {
            seen.insert(t.nearest(&back, 0.5, TieBreak::Random, &mut g).unwrap());
        }
        assert_eq!(seen, [a, b].into());
    }

    #[test]
    fn done_nodes_are_not_candidates() {
        let s = catalog::dual_hallway().instantiate(3).unwrap().initial;
        let mut t = RrtTree::new(s.clone());
        let (d, _) = step(&s, Action::Done).unwrap();
        t.add_child(0, Action::Done, d.clone(), 1);
        let target = TargetConfig {
            cell: d.agent.pos,
            dir: d.agent.dir,
        };
        for tie in [TieBreak::LowestId, TieBreak::Random] {
            assert_eq!(t.nearest(&target, 0.5, tie, &mut rng()), Some(0));
        }
    }

    #[test]
    fn jsonl_dump() {
        let s = catalog::dual_hallway().instantiate(3).unwrap().initial;
        let mut t = RrtTree::new(s.clone());
        t.add_child(0, Action::Forward, step(&s, Action::Forward).unwrap().0, 1);
        let mut buf = Vec::new();
        t.write_jsonl(&mut buf).unwrap();
        let lines: Vec<NodeRecord> = String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].parent, None);
        assert_eq!(lines[1].parent, Some(0));
        assert_eq!(lines[1].action_in, Some(Action::Forward));
    }
}
