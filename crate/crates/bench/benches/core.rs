use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use playtest_core::clone::{self, TrainConfig};
use playtest_core::demo::coverage_tour;
use playtest_core::explorer::{run, ActionSampler, ActionWeights, ExplorerConfig, TargetConfig, TieBreak};
use playtest_core::gridworld::{catalog, observe, step, Action, CellCoord, Direction};
use playtest_core::state_space::{config_hash, ground_truth_cells};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn engine(c: &mut Criterion) {
    let inst = catalog::dual_hallway_obstacles().instantiate(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let actions: Vec<Action> = (0..1000).map(|_| Action::ALL[rng.gen_range(0..6)]).collect();
    c.bench_function("step x1000", |b| {
        b.iter(|| {
            let mut s = inst.initial.clone();
            for &a in &actions {
                s = step(&s, a).unwrap().0;
            }
            black_box(s)
        })
    });
    c.bench_function("observe", |b| b.iter(|| black_box(observe(black_box(&inst.initial)))));
    c.bench_function("config_hash", |b| b.iter(|| black_box(config_hash(black_box(&inst.initial)))));
    let cld = catalog::cascading_lock_door().instantiate(3).unwrap();
    c.bench_function("ground_truth_cells", |b| b.iter(|| black_box(ground_truth_cells(black_box(&cld)))));
}

fn explorer(c: &mut Criterion) {
    let inst = catalog::dual_hallway().instantiate(2).unwrap();
    let config = ExplorerConfig {
        max_iterations: 5000,
        seed: 1,
        ..Default::default()
    };
    let mut g = c.benchmark_group("rrt 5000 iterations");
    g.sample_size(10);
    g.bench_function("weighted", |b| {
        b.iter(|| run(&inst, ActionSampler::Weighted(ActionWeights::default()), None, config.clone()).unwrap())
    });
    let demo = coverage_tour(&catalog::dual_hallway().instantiate(7).unwrap(), usize::MAX, 5000).unwrap();
    let model = clone::train(
        &[demo],
        &TrainConfig {
            epochs: 20,
            ..Default::default()
        },
    )
    .unwrap();
    let sampler = ActionSampler::ClonePrior {
        policy: Arc::new(model),
        alpha0: 0.1,
        growth: 1e-5,
        fallback: ActionWeights::default(),
    };
    g.bench_function("clone prior", |b| b.iter(|| run(&inst, sampler.clone(), None, config.clone()).unwrap()));
    g.finish();

    let (tree, _) = run(
        &inst,
        ActionSampler::Weighted(ActionWeights::default()),
        None,
        ExplorerConfig {
            max_iterations: 20_000,
            ..Default::default()
        },
    )
    .unwrap();
    let target = TargetConfig {
        cell: CellCoord::new(12, 8),
        dir: Direction::North,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    c.bench_function("nearest over 20k nodes", |b| {
        b.iter(|| black_box(tree.nearest(&target, 0.5, TieBreak::Random, &mut rng)))
    });
}

fn training(c: &mut Criterion) {
    let demo = coverage_tour(&catalog::dual_hallway().instantiate(7).unwrap(), usize::MAX, 5000).unwrap();
    let mut g = c.benchmark_group("clone");
    g.sample_size(10);
    g.bench_function("train 10 epochs", |b| {
        b.iter(|| {
            clone::train(
                std::slice::from_ref(&demo),
                &TrainConfig {
                    epochs: 10,
                    ..Default::default()
                },
            )
            .unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, engine, explorer, training);
criterion_main!(benches);
