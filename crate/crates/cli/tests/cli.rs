use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use playtest_core::gridworld::catalog;
use playtest_core::state_space::{brute_force_reachable, ground_truth_cells, CoverageCurve};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_playtest"))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn ground_truth_prints_count_and_map() {
    let o = run(&["ground-truth", "--template", "DualHallway", "--instance-seed", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let count: u32 = out.lines().next().unwrap().parse().unwrap();
    let inst = catalog::dual_hallway().instantiate(4).unwrap();
    assert_eq!(count, ground_truth_cells(&inst).count);
    assert_eq!(out.lines().skip(1).count(), inst.height());
    assert_eq!(out.matches('o').count() as u32, count);
}

#[test]
fn ground_truth_matches_oracle_on_a_miniature() {
    let o = run(&["ground-truth", "--template", "MiniCascadingLockDoor", "--instance-seed", "2"]);
    let count: usize = stdout(&o).lines().next().unwrap().parse().unwrap();
    let inst = catalog::mini_cascading().instantiate(2).unwrap();
    assert_eq!(count, brute_force_reachable(&inst, 5_000_000).unwrap().len());
}

#[test]
fn unknown_template_is_a_usage_error() {
    let o = run(&["ground-truth", "--template", "Nowhere"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("unknown template"));
    assert_eq!(code(&run(&["explore", "--bogus"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

fn demo(dir: &Path) -> PathBuf {
    let out = dir.join("demo.json");
    let o = run(&["demo", "--template", "DualHallway", "--instance-seed", "7", "--cells", "30", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn train_is_deterministic_and_verifies_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let traj = demo(dir.path());
    let (m1, m2) = (dir.path().join("a.bin"), dir.path().join("b.bin"));
    for m in [&m1, &m2] {
        let o = run(&["train", "--trajectory", p(&traj), "--epochs", "20", "--out", p(m)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(stdout(&o).contains("final loss"));
    }
    assert_eq!(std::fs::read(&m1).unwrap(), std::fs::read(&m2).unwrap());

    // Flip one digest: replay no longer reproduces it.
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&traj).unwrap()).unwrap();
    v["digests"][3] = serde_json::json!("00".repeat(32));
    let bad = dir.path().join("corrupt.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let o = run(&["train", "--trajectory", p(&traj), "--trajectory", p(&bad), "--out", p(&dir.path().join("c.bin"))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("corrupt.json"), "{}", stderr(&o));
    assert!(!dir.path().join("c.bin").exists());
}

#[test]
fn explore_flag_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["explore", "--template", "DualHallway", "--method", "hsrrt", "--out", p(&out)]);
    assert_eq!(code(&o), 1);
    assert!(!out.exists());

    // Zero budget with a trajectory: one row holding the trajectory's coverage.
    let traj = demo(dir.path());
    let o = run(&["explore", "--template", "DualHallway", "--method", "hsrrt", "--trajectory", p(&traj), "--budget", "0", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("curve.csv")).unwrap();
    assert_eq!(csv, "iteration,count\n0,30\n");
    assert!(out.join("tree.jsonl").exists());
}

#[test]
fn explore_with_a_model_stays_below_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let traj = demo(dir.path());
    let model = dir.path().join("m.bin");
    assert_eq!(code(&run(&["train", "--trajectory", p(&traj), "--epochs", "30", "--out", p(&model)])), 0);
    let out = dir.path().join("ca");
    let o = run(&[
        "explore", "--template", "DualHallway", "--instance-seed", "3", "--method", "carrt", "--model", p(&model),
        "--alpha0", "0.2", "--alpha-growth", "0.0001", "--rollout-cap", "50", "--budget", "1500", "--master-seed", "5",
        "--out", p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let curve = CoverageCurve::read_csv(std::fs::read_to_string(out.join("curve.csv")).unwrap().as_bytes()).unwrap();
    let gt = ground_truth_cells(&catalog::dual_hallway().instantiate(3).unwrap()).count;
    assert_eq!(curve.len(), 1501);
    assert!(curve.final_count() <= gt);
    let tree_lines = std::fs::read_to_string(out.join("tree.jsonl")).unwrap().lines().count();
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(summary["nodes"], tree_lines);

    let o = run(&["explore", "--template", "DualHallway", "--method", "carrt", "--model", "missing.bin", "--out", p(&out)]);
    assert_eq!(code(&o), 2);
    let o = run(&["explore", "--template", "DualHallway", "--method", "wrrt", "--weights", "1,2,3", "--out", p(&out)]);
    assert_eq!(code(&o), 1);
}

fn dir_bytes(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn shipped_manifest_runs_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = root().join("manifests/dual_hallway.json");
    let mut runs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("r{i}"));
        let o = run(&["experiment", p(&manifest), "--trials", "3", "--budget", "1500", "--out", p(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(stdout(&o).contains("carrt vs wrrt"));
        assert!(out.join("wrrt/bands.csv").exists());
        assert!(out.join("carrt/trial_002.csv").exists());
        assert!(out.join("summary.json").exists());
        assert!(out.join("coverage.svg").exists());
        runs.push(dir_bytes(&out));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn manifest_with_missing_model_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(
        &m,
        r#"{"template": "DualHallway", "output_dir": "out",
            "methods": [{"kind": "wrrt"}, {"kind": "carrt", "model": "absent.bin"}]}"#,
    )
    .unwrap();
    let o = run(&["experiment", p(&m)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("absent.bin"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

fn http_get(port: u16, path: &str) -> Option<String> {
    let mut s = TcpStream::connect(("127.0.0.1", port)).ok()?;
    s.set_read_timeout(Some(Duration::from_secs(5))).ok()?;
    write!(s, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").ok()?;
    let mut buf = String::new();
    s.read_to_string(&mut buf).ok()?;
    Some(buf)
}

#[test]
fn serve_health_no_ui_and_port_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let bind = format!("127.0.0.1:{port}");
    let mut child = bin()
        .args(["serve", "--bind", &bind, "--no-ui", "--trajectory-dir", p(&dir.path().join("t"))])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let start = Instant::now();
    let health = loop {
        if let Some(r) = http_get(port, "/health") {
            break r;
        }
        assert!(start.elapsed() < Duration::from_secs(20), "service did not start");
        std::thread::sleep(Duration::from_millis(50));
    };
    assert!(health.starts_with("HTTP/1.1 200"), "{health}");
    assert!(health.contains("schema_version"));
    let page = http_get(port, "/index.html").unwrap();
    assert!(page.starts_with("HTTP/1.1 404"), "{page}");

    let o = run(&["serve", "--bind", &bind, "--no-ui"]);
    assert_eq!(code(&o), 2);
    child.kill().unwrap();
    child.wait().unwrap();
}
