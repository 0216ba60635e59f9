use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use playtest_core::clone::{Author, Trajectory};
use playtest_core::gridworld::{step, Action, CellCoord, EnvInstance, GameState, StepOutcome};
use serde::Serialize;
use uuid::Uuid;

use crate::error::ApiError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Live,
    Saved,
    Abandoned,
}

impl SessionStatus {
    fn name(self) -> &'static str {
        match self {
            SessionStatus::Live => "live",
            SessionStatus::Saved => "saved",
            SessionStatus::Abandoned => "abandoned",
        }
    }
}

/// One human play session. `trajectory` replayed from `instance.initial`
/// always reproduces `state`.
pub struct Session {
    pub id: Uuid,
    pub instance: EnvInstance,
    pub state: GameState,
    pub trajectory: Trajectory,
    pub visited: HashSet<CellCoord>,
    pub ground_truth: u32,
    pub status: SessionStatus,
    pub created_at: SystemTime,
    last_used: Instant,
}

impl Session {
    pub fn new(instance: EnvInstance, ground_truth: u32) -> Self {
        Session {
            id: Uuid::new_v4(),
            state: instance.initial.clone(),
            trajectory: Trajectory::empty(&instance, Author::Human),
            visited: HashSet::from([instance.start()]),
            instance,
            ground_truth,
            status: SessionStatus::Live,
            created_at: SystemTime::now(),
            last_used: Instant::now(),
        }
    }

    fn require_live(&self) -> Result<(), ApiError> {
        match self.status {
            SessionStatus::Live if self.state.done => Err(ApiError::SessionNotLive("finished")),
            SessionStatus::Live => Ok(()),
            s => Err(ApiError::SessionNotLive(s.name())),
        }
    }

    pub fn act(&mut self, action_id: i64) -> Result<StepOutcome, ApiError> {
        self.require_live()?;
        let action = u8::try_from(action_id)
            .ok()
            .and_then(Action::from_id)
            .ok_or(ApiError::InvalidAction(action_id))?;
        let (_, outcome) = step(&self.state, action).expect("live session is not done");
        self.state = self.trajectory.push(&self.state, action).expect("live session is not done");
        self.visited.insert(self.state.agent.pos);
        Ok(outcome)
    }

    /// Trajectory ready to write; marks the session saved.
    pub fn take_for_save(&mut self) -> Result<Trajectory, ApiError> {
        if self.status != SessionStatus::Live {
            return Err(ApiError::SessionNotLive(self.status.name()));
        }
        if self.trajectory.is_empty() {
            return Err(ApiError::EmptySession);
        }
        let mut t = self.trajectory.clone();
        t.recorded_at = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
        Ok(t)
    }

    pub fn mark_saved(&mut self) {
        self.status = SessionStatus::Saved;
    }

    pub fn created_unix(&self) -> u64 {
        self.created_at.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
    }
}

/// In-memory session table. Each session has its own lock so distinct
/// sessions never wait on each other.
pub struct SessionStore {
    ttl: Duration,
    map: Mutex<HashMap<Uuid, Arc<Mutex<Session>>>>,
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        SessionStore {
            ttl,
            map: Mutex::new(HashMap::new()),
        }
    }

    pub fn insert(&self, s: Session) -> Arc<Mutex<Session>> {
        self.expire();
        let id = s.id;
        let entry = Arc::new(Mutex::new(s));
        self.map.lock().unwrap().insert(id, entry.clone());
        entry
    }

    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.expire();
        let uuid = Uuid::parse_str(id).map_err(|_| ApiError::UnknownSession(id.to_string()))?;
        let entry = self
            .map
            .lock()
            .unwrap()
            .get(&uuid)
            .cloned()
            .ok_or_else(|| ApiError::UnknownSession(id.to_string()))?;
        entry.lock().unwrap().last_used = Instant::now();
        Ok(entry)
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops sessions idle for longer than the TTL.
    pub fn expire(&self) {
        let ttl = self.ttl;
        self.map.lock().unwrap().retain(|_, s| match s.try_lock() {
            Ok(s) => s.last_used.elapsed() <= ttl,
            // In use right now, so not idle.
            Err(_) => true,
        });
    }
}
