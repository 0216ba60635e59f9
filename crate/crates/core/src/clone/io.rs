//! Versioned little-endian binary model format.
//!
//! Layout: magic, format version, encoding legend (view size, class/color/status
//! counts), layer sizes, training metadata, parameter count, then parameters.

use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use super::model::{PolicyModel, TrainingMeta, OUTPUTS};
use crate::gridworld::{DoorStatus, ObjectClass, COLOR_IDS, VIEW_SIZE};

pub const MAGIC: &[u8; 8] = b"PTCLONE\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn legend() -> [u32; 4] {
    [
        VIEW_SIZE as u32,
        ObjectClass::COUNT as u32,
        COLOR_IDS as u32,
        DoorStatus::COUNT as u32,
    ]
}

pub fn to_bytes(model: &PolicyModel) -> Vec<u8> {
    let mut out = Vec::new();
    let w = &mut out;
    w.write_all(MAGIC).unwrap();
    w.write_u32::<LE>(FORMAT_VERSION).unwrap();
    for v in legend() {
        w.write_u32::<LE>(v).unwrap();
    }
    w.write_u32::<LE>(model.input_dim() as u32).unwrap();
    w.write_u32::<LE>(model.hidden() as u32).unwrap();
    w.write_u32::<LE>(OUTPUTS as u32).unwrap();
    let m = &model.meta;
    w.write_u64::<LE>(m.examples).unwrap();
    w.write_u32::<LE>(m.epochs).unwrap();
    w.write_u64::<LE>(m.seed).unwrap();
    w.write_f64::<LE>(m.final_loss).unwrap();
    w.write_f64::<LE>(m.train_accuracy).unwrap();
    w.write_u64::<LE>(model.params().len() as u64).unwrap();
    for &p in model.params() {
        w.write_f64::<LE>(p).unwrap();
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<PolicyModel, ModelIoError> {
    let truncated = |_| ModelIoError::CorruptFile("unexpected end of file".into());
    let mut r = Cursor::new(bytes);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(ModelIoError::CorruptFile("bad magic".into()));
    }
    let version = r.read_u32::<LE>().map_err(truncated)?;
    if version != FORMAT_VERSION {
        return Err(ModelIoError::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let mut file_legend = [0u32; 4];
    for v in &mut file_legend {
        *v = r.read_u32::<LE>().map_err(truncated)?;
    }
    if file_legend != legend() {
        return Err(ModelIoError::CorruptFile(format!(
            "observation legend {file_legend:?} does not match this build {:?}",
            legend()
        )));
    }
    let input_dim = r.read_u32::<LE>().map_err(truncated)? as usize;
    let hidden = r.read_u32::<LE>().map_err(truncated)? as usize;
    let outputs = r.read_u32::<LE>().map_err(truncated)? as usize;
    if outputs != OUTPUTS {
        return Err(ModelIoError::CorruptFile(format!("expected {OUTPUTS} outputs, found {outputs}")));
    }
    let meta = TrainingMeta {
        examples: r.read_u64::<LE>().map_err(truncated)?,
        epochs: r.read_u32::<LE>().map_err(truncated)?,
        seed: r.read_u64::<LE>().map_err(truncated)?,
        final_loss: r.read_f64::<LE>().map_err(truncated)?,
        train_accuracy: r.read_f64::<LE>().map_err(truncated)?,
    };
    let count = r.read_u64::<LE>().map_err(truncated)? as usize;
    if count != PolicyModel::param_count(input_dim, hidden) {
        return Err(ModelIoError::CorruptFile("parameter count does not match layer sizes".into()));
    }
    let remaining = bytes.len() - r.position() as usize;
    if remaining < count * 8 {
        return Err(ModelIoError::CorruptFile("unexpected end of file".into()));
    }
    if remaining > count * 8 {
        return Err(ModelIoError::CorruptFile("trailing bytes after parameters".into()));
    }
    let mut params = vec![0.0; count];
    r.read_f64_into::<LE>(&mut params).map_err(truncated)?;
    PolicyModel::from_parts(input_dim, hidden, params, meta)
        .ok_or_else(|| ModelIoError::CorruptFile("inconsistent dimensions".into()))
}

/// Writes through a sibling temp file and renames it into place.
pub fn save(model: &PolicyModel, path: impl AsRef<Path>) -> Result<(), ModelIoError> {
    crate::util::write_atomic(path.as_ref(), &to_bytes(model))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<PolicyModel, ModelIoError> {
    from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn model() -> PolicyModel {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut m = PolicyModel::initialized(30, 5, &mut rng);
        m.meta.epochs = 12;
        m.meta.final_loss = 0.25;
        m
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model();
        let back = from_bytes(&to_bytes(&m)).unwrap();
        assert_eq!(back, m);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        save(&m, &path).unwrap();
        assert_eq!(load(&path).unwrap(), m);
    }

    #[test]
    fn truncation_is_detected() {
        let bytes = to_bytes(&model());
        for cut in [3, 20, bytes.len() - 1] {
            assert!(matches!(from_bytes(&bytes[..cut]), Err(ModelIoError::CorruptFile(_))), "{cut}");
        }
    }

    #[test]
    fn version_tag_is_checked() {
        let mut bytes = to_bytes(&model());
        bytes[8] = 9;
        assert!(matches!(
            from_bytes(&bytes),
            Err(ModelIoError::VersionMismatch { found: 9, .. })
        ));
    }
}
