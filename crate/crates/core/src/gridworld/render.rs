use serde::{Deserialize, Serialize};

use super::types::{AgentState, GameState, Tile};

/// Full (non-partial) symbolic description of a state, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridRender {
    pub width: usize,
    pub height: usize,
    pub rows: Vec<Vec<Tile>>,
    pub agent: AgentState,
    pub step_count: u32,
    pub done: bool,
}

pub fn render_grid(state: &GameState) -> GridRender {
    GridRender {
        width: state.width(),
        height: state.height(),
        rows: state
            .tiles()
            .chunks(state.width())
            .map(|r| r.to_vec())
            .collect(),
        agent: state.agent,
        step_count: state.step_count,
        done: state.done,
    }
}

impl GridRender {
    /// ASCII picture of the grid, agent drawn as an arrow.
    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        for (y, row) in self.rows.iter().enumerate() {
            for (x, t) in row.iter().enumerate() {
                let ch = if self.agent.pos.x == x && self.agent.pos.y == y {
                    ['>', 'v', '<', '^'][self.agent.dir as usize]
                } else {
                    match t {
                        Tile::Floor => '.',
                        Tile::Wall => '#',
                        Tile::Goal => 'G',
                        Tile::Door { open: true, .. } | Tile::MultiLockDoor { open: true, .. } => '_',
                        Tile::Door { locked: true, .. } => 'L',
                        Tile::Door { .. } => 'D',
                        Tile::MultiLockDoor { .. } => 'M',
                        Tile::Key { .. } => 'k',
                        Tile::Ball { .. } => 'b',
                        Tile::HeavyBall => 'O',
                    }
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::catalog;

    #[test]
    fn render_round_trips_through_json() {
        let s = catalog::cascading_lock_door().instantiate(3).unwrap().initial;
        let r = render_grid(&s);
        let text = serde_json::to_string(&r).unwrap();
        let back: GridRender = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(text, serde_json::to_string(&render_grid(&s.clone())).unwrap());
    }

    #[test]
    fn render_exposes_lock_progress() {
        let s = catalog::cascading_lock_door().instantiate(3).unwrap().initial;
        let v = serde_json::to_value(render_grid(&s)).unwrap();
        let doors: Vec<&serde_json::Value> = v["rows"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|r| r.as_array().unwrap())
            .filter(|t| t["kind"] == "multi_lock_door")
            .collect();
        assert_eq!(doors.len(), 2);
        for d in doors {
            assert!(d["applied"].is_array());
            assert!(d["required"].is_array());
        }
    }
}
