//! The JSON files shipped next to the code agree with the built-ins.

use std::path::{Path, PathBuf};

use playtest_core::clone::{replay_verify, Trajectory};
use playtest_core::gridworld::{catalog, EnvTemplate};
use playtest_core::harness::load_manifest;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn template_files_equal_builtins() {
    for t in catalog::catalog() {
        let path = root().join("templates").join(format!("{}.json", catalog::file_stem(&t.name)));
        let loaded = EnvTemplate::load(&path).unwrap();
        assert_eq!(loaded, t, "{}", path.display());
        for seed in [0, 1, 99] {
            assert_eq!(loaded.instantiate(seed).unwrap().initial, t.instantiate(seed).unwrap().initial);
        }
    }
}

#[test]
fn demo_files_replay() {
    let mut n = 0;
    for e in std::fs::read_dir(root().join("demos")).unwrap() {
        let t = Trajectory::load(e.unwrap().path()).unwrap();
        assert!(replay_verify(&t).unwrap());
        n += 1;
    }
    assert!(n >= 3);
}

#[test]
fn manifests_validate() {
    for e in std::fs::read_dir(root().join("manifests")).unwrap() {
        let path = e.unwrap().path();
        let m = load_manifest(&path).unwrap_or_else(|err| panic!("{}: {err}", path.display()));
        assert!(!m.specs.is_empty());
    }
}
