use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::types::{Action, GameState, Item, Tile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("cannot step a state that is already done")]
    SteppedAfterDone,
}

/// What a single step did.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOutcome {
    Turned,
    Moved,
    Blocked,
    PickedUp,
    Dropped,
    Toggled,
    KeyApplied,
    NoOp,
    Finished,
}

/// Applies `action` to a copy of `state`.
///
/// Pure: the input is never modified. Key application to a multi-lock door
/// is non-consuming; the agent keeps the key in hand.
pub fn step(state: &GameState, action: Action) -> Result<(GameState, StepOutcome), StepError> {
    if state.done {
        return Err(StepError::SteppedAfterDone);
    }
    let mut next = state.clone();
    next.step_count += 1;
    let outcome = match action {
        Action::Left => {
            next.agent.dir = next.agent.dir.left();
            StepOutcome::Turned
        }
        Action::Right => {
            next.agent.dir = next.agent.dir.right();
            StepOutcome::Turned
        }
        Action::Forward => match next.front_cell() {
            Some(c) if next.tile(c).occupiable() => {
                next.agent.pos = c;
                StepOutcome::Moved
            }
            _ => StepOutcome::Blocked,
        },
        Action::Pickup => pickup(&mut next),
        Action::Drop => drop_item(&mut next),
        Action::Toggle => toggle(&mut next),
        Action::Done => {
            next.done = true;
            StepOutcome::Finished
        }
    };
    Ok((next, outcome))
}

fn pickup(s: &mut GameState) -> StepOutcome {
    if s.agent.carrying.is_some() {
        return StepOutcome::NoOp;
    }
    let Some(c) = s.front_cell() else {
        return StepOutcome::NoOp;
    };
    match s.tile(c).item() {
        Some(item) => {
            s.agent.carrying = Some(item);
            s.set_tile(c, Tile::Floor);
            StepOutcome::PickedUp
        }
        None => StepOutcome::NoOp,
    }
}

fn drop_item(s: &mut GameState) -> StepOutcome {
    let (Some(item), Some(c)) = (s.agent.carrying, s.front_cell()) else {
        return StepOutcome::NoOp;
    };
    if s.tile(c) != Tile::Floor {
        return StepOutcome::NoOp;
    }
    s.set_tile(c, item.as_tile());
    s.agent.carrying = None;
    StepOutcome::Dropped
}

fn toggle(s: &mut GameState) -> StepOutcome {
    let Some(c) = s.front_cell() else {
        return StepOutcome::NoOp;
    };
    match s.tile(c) {
        Tile::Door {
            color,
            open,
            locked: true,
        } => match s.agent.carrying {
            Some(Item::Key { color: kc, .. }) if kc == color => {
                debug_assert!(!open);
                s.set_tile(
                    c,
                    Tile::Door {
                        color,
                        open: true,
                        locked: false,
                    },
                );
                StepOutcome::Toggled
            }
            _ => StepOutcome::NoOp,
        },
        Tile::Door {
            color,
            open,
            locked: false,
        } => {
            s.set_tile(
                c,
                Tile::Door {
                    color,
                    open: !open,
                    locked: false,
                },
            );
            StepOutcome::Toggled
        }
        Tile::MultiLockDoor {
            color,
            required,
            applied,
            open: false,
        } => {
            if let Some(Item::Key { id, .. }) = s.agent.carrying {
                if required.contains(id) && !applied.contains(id) {
                    s.set_tile(
                        c,
                        Tile::MultiLockDoor {
                            color,
                            required,
                            applied: applied.with(id),
                            open: false,
                        },
                    );
                    return StepOutcome::KeyApplied;
                }
            }
            if applied == required {
                s.set_tile(
                    c,
                    Tile::MultiLockDoor {
                        color,
                        required,
                        applied,
                        open: true,
                    },
                );
                StepOutcome::Toggled
            } else {
                StepOutcome::NoOp
            }
        }
        // An opened multi-lock door stays open.
        _ => StepOutcome::NoOp,
    }
}

/// Replays `actions` from `initial`, returning every intermediate state
/// (the initial state first).
pub fn replay(initial: &GameState, actions: &[Action]) -> Result<Vec<GameState>, StepError> {
    let mut states = Vec::with_capacity(actions.len() + 1);
    states.push(initial.clone());
    for &a in actions {
        let (next, _) = step(states.last().expect("non-empty"), a)?;
        states.push(next);
    }
    Ok(states)
}
