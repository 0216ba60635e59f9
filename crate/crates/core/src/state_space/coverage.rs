use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridworld::{CellCoord, GameState};

/// Coverage projection: the agent's map cell.
pub fn map_cell(state: &GameState) -> CellCoord {
    state.agent.pos
}

/// Cumulative count of distinct agent cells, indexed by iteration.
/// Entry 0 is the coverage after seeding, before any expansion.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoverageCurve(pub Vec<u32>);

#[derive(Debug, Error)]
pub enum CurveCsvError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

impl CoverageCurve {
    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last_iteration(&self) -> u64 {
        self.0.len().saturating_sub(1) as u64
    }

    pub fn final_count(&self) -> u32 {
        self.0.last().copied().unwrap_or(0)
    }

    pub fn at(&self, iteration: u64) -> u32 {
        let i = (iteration as usize).min(self.0.len().saturating_sub(1));
        self.0.get(i).copied().unwrap_or(0)
    }

    /// Smallest iteration at which the count reaches `total`.
    pub fn saturation_iteration(&self, total: u32) -> Option<u64> {
        self.0.iter().position(|&c| c >= total).map(|i| i as u64)
    }

    /// Rows `(iteration, count)` at iteration 0, every change and the last iteration.
    pub fn change_points(&self) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        for (i, &c) in self.0.iter().enumerate() {
            if out.last().is_none_or(|&(_, prev)| prev != c) {
                out.push((i as u64, c));
            }
        }
        let last = self.last_iteration();
        if !self.0.is_empty() && out.last().map(|r| r.0) != Some(last) {
            out.push((last, self.final_count()));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iteration,count")?;
        for (i, c) in self.change_points() {
            writeln!(w, "{i},{c}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii")
    }

    /// Inverse of [`CoverageCurve::write_csv`]: forward-fills between change points.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, CurveCsvError> {
        let mut counts: Vec<u32> = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            if n == 0 {
                if line.trim() != "iteration,count" {
                    return Err(CurveCsvError::Malformed {
                        line: 1,
                        reason: format!("unexpected header {line:?}"),
                    });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: &str| CurveCsvError::Malformed {
                line: n + 1,
                reason: reason.to_string(),
            };
            let (i, c) = line.split_once(',').ok_or_else(|| bad("expected two fields"))?;
            let i: usize = i.trim().parse().map_err(|_| bad("bad iteration"))?;
            let c: u32 = c.trim().parse().map_err(|_| bad("bad count"))?;
            if i < counts.len() {
                return Err(bad("iterations must increase"));
            }
            if let Some(&prev) = counts.last() {
                counts.resize(i, prev);
            } else if i != 0 {
                return Err(bad("first row must be iteration 0"));
            }
            counts.push(c);
        }
        Ok(CoverageCurve(counts))
    }
}

/// Tracks the set of visited cells and the per-iteration cumulative count.
#[derive(Clone, Debug)]
pub struct CoverageTracker {
    width: usize,
    visited: Vec<bool>,
    count: u32,
    ground_truth_total: u32,
    counts: Vec<u32>,
}

impl CoverageTracker {
    pub fn new(width: usize, height: usize, ground_truth_total: u32) -> Self {
        assert!(ground_truth_total > 0, "ground truth total must be positive");
        CoverageTracker {
            width,
            visited: vec![false; width * height],
            count: 0,
            ground_truth_total,
            counts: Vec::new(),
        }
    }

    /// Records the state's map cell at `iteration`; returns whether the cell is new.
    pub fn record(&mut self, state: &GameState, iteration: u64) -> bool {
        let it = iteration as usize;
        assert!(
            self.counts.is_empty() || it + 1 >= self.counts.len(),
            "iterations must be recorded in order"
        );
        if self.counts.len() <= it {
            self.counts.resize(it + 1, self.count);
        }
        let c = map_cell(state);
        let slot = &mut self.visited[c.y * self.width + c.x];
        let novel = !*slot;
        if novel {
            *slot = true;
            self.count += 1;
            debug_assert!(self.count <= self.ground_truth_total, "cell {c} beyond ground truth");
        }
        self.counts[it] = self.count;
        novel
    }

    /// Extends the per-iteration record to `iteration` without a new visit.
    pub fn tick(&mut self, iteration: u64) {
        let it = iteration as usize;
        if self.counts.len() <= it {
            self.counts.resize(it + 1, self.count);
        }
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn ground_truth_total(&self) -> u32 {
        self.ground_truth_total
    }

    pub fn saturated(&self) -> bool {
        self.count >= self.ground_truth_total
    }

    pub fn is_visited(&self, c: CellCoord) -> bool {
        self.visited[c.y * self.width + c.x]
    }

    pub fn curve(&self) -> CoverageCurve {
        CoverageCurve(self.counts.clone())
    }
}
