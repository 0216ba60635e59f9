use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use playtest_core::explorer::Explorer;
use playtest_core::harness::{ExploreParams, ExploreSetup};
use serde::Serialize;
use uuid::Uuid;

use crate::error::ApiError;

/// Iterations between published snapshots.
pub const PUBLISH_EVERY: u64 = 250;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Finished,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSnapshot {
    pub status: RunStatus,
    /// Coverage after each iteration so far; only ever extended.
    pub curve: Vec<u32>,
    /// Tree nodes so far: the offset a tree dump would resume from.
    pub tree_offset: usize,
    pub error: Option<String>,
}

pub struct Run {
    pub id: Uuid,
    pub params: ExploreParams,
    pub ground_truth: u32,
    progress: RwLock<RunSnapshot>,
}

impl Run {
    pub fn snapshot(&self) -> RunSnapshot {
        self.progress.read().unwrap().clone()
    }

    fn publish(&self, ex: &Explorer, status: RunStatus) {
        let curve = ex.tracker().curve();
        let mut p = self.progress.write().unwrap();
        let have = p.curve.len();
        p.curve.extend_from_slice(&curve.counts()[have.min(curve.len())..]);
        p.tree_offset = ex.tree().len();
        p.status = status;
    }

    fn fail(&self, msg: String) {
        let mut p = self.progress.write().unwrap();
        p.status = RunStatus::Failed;
        p.error = Some(msg);
    }
}

#[derive(Default)]
pub struct RunStore {
    map: RwLock<HashMap<Uuid, Arc<Run>>>,
}

impl RunStore {
    pub fn get(&self, id: &str) -> Result<Arc<Run>, ApiError> {
        let uuid = Uuid::parse_str(id).map_err(|_| ApiError::UnknownRun(id.to_string()))?;
        self.map
            .read()
            .unwrap()
            .get(&uuid)
            .cloned()
            .ok_or_else(|| ApiError::UnknownRun(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    /// Registers the run and starts it on a blocking worker.
    pub fn start(&self, params: ExploreParams, setup: ExploreSetup, ground_truth: u32) -> Result<Arc<Run>, ApiError> {
        let ExploreSetup {
            instance,
            sampler,
            seeds,
            config,
            ..
        } = setup;
        let explorer = Explorer::new(&instance, sampler, seeds.as_ref(), config).map_err(|e| ApiError::BadRequest(e.to_string()))?;
        let run = Arc::new(Run {
            id: Uuid::new_v4(),
            params,
            ground_truth,
            progress: RwLock::new(RunSnapshot {
                status: RunStatus::Running,
                curve: Vec::new(),
                tree_offset: 0,
                error: None,
            }),
        });
        run.publish(&explorer, RunStatus::Running);
        self.map.write().unwrap().insert(run.id, run.clone());
        let worker = run.clone();
        tokio::task::spawn_blocking(move || drive(worker, explorer));
        Ok(run)
    }
}

fn drive(run: Arc<Run>, mut ex: Explorer) {
    let budget = ex.config().max_iterations;
    while ex.iteration() < budget {
        if let Err(e) = ex.step() {
            run.publish(&ex, RunStatus::Running);
            run.fail(e.to_string());
            return;
        }
        if ex.iteration().is_multiple_of(PUBLISH_EVERY) && ex.iteration() < budget {
            run.publish(&ex, RunStatus::Running);
        }
    }
    if let Err(e) = ex.run_to_end() {
        run.fail(e.to_string());
        return;
    }
    run.publish(&ex, RunStatus::Finished);
}
