//! Deterministic minigrid-style engine.

pub mod catalog;
mod engine;
mod observe;
mod render;
mod template;
mod types;

pub use catalog::catalog;
pub use engine::{replay, step, StepError, StepOutcome};
pub use observe::{
    encode_tile, observe, DoorStatus, ObjectClass, Observation, COLOR_IDS, VIEW_CELLS, VIEW_SIZE,
};
pub use render::{render_grid, GridRender};
pub use template::{
    default_legend, DoorLock, DoorSlot, EnvInstance, EnvTemplate, KeySlot, LegendTile,
    TemplateError, Variant,
};
pub use types::{
    Action, AgentState, CellCoord, Color, Direction, GameState, Item, KeyId, KeySet, Tile,
};
