use crate::gridworld::{DoorStatus, ObjectClass, Observation, COLOR_IDS, VIEW_CELLS};

/// Width of one cell's one-hot block: class ⊕ color ⊕ door status.
pub const CELL_FEATURES: usize = ObjectClass::COUNT + COLOR_IDS + DoorStatus::COUNT;
pub const FEATURE_DIM: usize = VIEW_CELLS * CELL_FEATURES;

/// Flattened one-hot encoding of an observation; exactly three ones per cell.
pub fn encode(obs: &Observation) -> Vec<f64> {
    let mut v = vec![0.0; FEATURE_DIM];
    for (i, &[class, color, status]) in obs.cells().iter().enumerate() {
        let base = i * CELL_FEATURES;
        v[base + class as usize] = 1.0;
        v[base + ObjectClass::COUNT + color as usize] = 1.0;
        v[base + ObjectClass::COUNT + COLOR_IDS + status as usize] = 1.0;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{catalog, observe, Direction};

    #[test]
    fn one_hot_blocks() {
        let mut s = catalog::dual_hallway().instantiate(2).unwrap().initial;
        s.agent.dir = Direction::North;
        let obs = observe(&s);
        let v = encode(&obs);
        assert_eq!(v.len(), FEATURE_DIM);
        assert_eq!(v, encode(&obs.clone()));
        for cell in v.chunks(CELL_FEATURES) {
            assert!(cell.iter().all(|&x| x == 0.0 || x == 1.0));
            assert_eq!(cell.iter().sum::<f64>(), 3.0);
        }
        // Unseen cells use the dedicated class slot.
        for (i, c) in obs.cells().iter().enumerate() {
            if c[0] == ObjectClass::Unseen as u8 {
                assert_eq!(v[i * CELL_FEATURES + ObjectClass::Unseen as usize], 1.0);
            }
        }
    }
}
