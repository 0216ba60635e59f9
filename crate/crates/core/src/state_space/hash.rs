use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::gridworld::{GameState, Item, Tile};

/// 64-bit digest of a state's canonical serialization.
///
/// The step counter is not part of the configuration, so two states that
/// reach the same grid, pose and inventory by different paths hash equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ConfigHash(pub u64);

impl fmt::Display for ConfigHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl FromStr for ConfigHash {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        u64::from_str_radix(s, 16).map(ConfigHash)
    }
}

impl From<ConfigHash> for String {
    fn from(h: ConfigHash) -> String {
        h.to_string()
    }
}

impl TryFrom<String> for ConfigHash {
    type Error = std::num::ParseIntError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

fn tile_bytes(t: Tile) -> [u8; 5] {
    match t {
        Tile::Floor => [0, 0, 0, 0, 0],
        Tile::Wall => [1, 0, 0, 0, 0],
        Tile::Goal => [2, 0, 0, 0, 0],
        Tile::Door {
            color,
            open,
            locked,
        } => [3, color.id(), open as u8 | (locked as u8) << 1, 0, 0],
        Tile::MultiLockDoor {
            color,
            required,
            applied,
            open,
        } => [4, color.id(), open as u8, required.bits(), applied.bits()],
        Tile::Key { color, id } => [5, color.id(), id.0, 0, 0],
        Tile::Ball { color } => [6, color.id(), 0, 0, 0],
        Tile::HeavyBall => [7, 0, 0, 0, 0],
    }
}

/// Canonical byte serialization of everything but the step counter.
pub fn canonical_bytes(state: &GameState) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + 5 * state.tiles().len());
    buf.extend_from_slice(&(state.width() as u16).to_le_bytes());
    buf.extend_from_slice(&(state.height() as u16).to_le_bytes());
    for &t in state.tiles() {
        buf.extend_from_slice(&tile_bytes(t));
    }
    let a = &state.agent;
    buf.extend_from_slice(&(a.pos.x as u16).to_le_bytes());
    buf.extend_from_slice(&(a.pos.y as u16).to_le_bytes());
    buf.push(a.dir.id());
    match a.carrying {
        None => buf.extend_from_slice(&[0, 0, 0]),
        Some(Item::Key { color, id }) => buf.extend_from_slice(&[1, color.id(), id.0]),
        Some(Item::Ball { color }) => buf.extend_from_slice(&[2, color.id(), 0]),
    }
    buf.push(state.done as u8);
    buf
}

pub fn config_hash(state: &GameState) -> ConfigHash {
    let digest = Sha256::digest(canonical_bytes(state));
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    ConfigHash(u64::from_be_bytes(head))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{catalog, step, Action};

    #[test]
    fn equal_states_hash_equal() {
        let s = catalog::dual_hallway().instantiate(1).unwrap().initial;
        assert_eq!(config_hash(&s), config_hash(&s.clone()));
    }

    #[test]
    fn direction_changes_the_hash() {
        let s = catalog::dual_hallway().instantiate(1).unwrap().initial;
        let t = step(&s, Action::Left).unwrap().0;
        assert_ne!(config_hash(&s), config_hash(&t));
        let back = step(&t, Action::Right).unwrap().0;
        assert_eq!(config_hash(&s), config_hash(&back));
    }

    #[test]
    fn hex_round_trip() {
        let h = ConfigHash(0x00ab_cdef_0123_4567);
        assert_eq!(h.to_string(), "00abcdef01234567");
        assert_eq!("00abcdef01234567".parse::<ConfigHash>().unwrap(), h);
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(serde_json::from_str::<ConfigHash>(&json).unwrap(), h);
    }
}
