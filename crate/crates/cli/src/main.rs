//! `playtest`: headless entry point.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use playtest_core::clone::{self, Trajectory, TrainConfig};
use playtest_core::demo;
use playtest_core::explorer::{ActionWeights, Explorer};
use playtest_core::gridworld::{catalog, CellCoord, EnvTemplate};
use playtest_core::harness::{
    prepare_explore, resolve_template, ExploreParams, HarnessError, MethodKind, DEFAULT_BUDGET,
};
use playtest_core::state_space::ground_truth_cells;
use playtest_core::write_atomic;

#[derive(Parser)]
#[command(name = "playtest", version, about = "Goal-free state-space exploration of gridworld levels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count the cells the agent can ever reach and print them as a map.
    GroundTruth(InstanceArgs),
    /// Write a scripted demonstration trajectory.
    Demo(DemoArgs),
    /// Train a behavior-cloned policy from trajectory files.
    Train(TrainArgs),
    /// Run one exploration and write its coverage curve and tree.
    Explore(ExploreArgs),
    /// Run every method of an experiment manifest.
    Experiment(ExperimentArgs),
    /// Serve the play/run API and the UI assets.
    Serve(ServeArgs),
    /// List the built-in templates, or write them as JSON files.
    Catalog(CatalogArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Built-in template name or a template JSON file.
    #[arg(long)]
    template: String,
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoKind {
    /// Greedy walk to the nearest unvisited cell.
    Tour,
    /// Fixed waypoints first, then greedy.
    Route,
    /// Open every door and reach the goal.
    Playthrough,
}

#[derive(Args)]
struct DemoArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "tour")]
    kind: DemoKind,
    /// Stop after this many distinct cells (tour and route).
    #[arg(long)]
    cells: Option<usize>,
    /// Route waypoints as `x,y` pairs separated by `;`.
    #[arg(long)]
    waypoints: Option<String>,
    #[arg(long, default_value_t = 5000)]
    max_steps: usize,
    /// Output trajectory file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Trajectory file; repeat for several.
    #[arg(long, required = true)]
    trajectory: Vec<PathBuf>,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    epochs: Option<u32>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ExploreArgs {
    #[arg(long)]
    template: String,
    /// Instance seed; a human-seeded run uses the trajectory's own seed.
    #[arg(long)]
    instance_seed: Option<u64>,
    #[arg(long, value_enum)]
    method: Method,
    /// Seven comma-separated action weights (normalized).
    #[arg(long)]
    weights: Option<ActionWeights>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    alpha_growth: Option<f64>,
    #[arg(long)]
    rollout_cap: Option<usize>,
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// RRT seed.
    #[arg(long, visible_alias = "master-seed", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Rrt,
    Wrrt,
    Hsrrt,
    Carrt,
}

impl From<Method> for MethodKind {
    fn from(m: Method) -> Self {
        match m {
            Method::Rrt => MethodKind::Rrt,
            Method::Wrrt => MethodKind::Wrrt,
            Method::Hsrrt => MethodKind::Hsrrt,
            Method::Carrt => MethodKind::Carrt,
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// Manifest JSON file.
    manifest: PathBuf,
    /// Override the manifest's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the manifest's iteration budget.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// Override the results directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    /// Serve the API only.
    #[arg(long)]
    no_ui: bool,
    #[arg(long, default_value = "web-ui/dist")]
    static_dir: PathBuf,
    #[arg(long, default_value = "trajectories")]
    trajectory_dir: PathBuf,
}

#[derive(Args)]
struct CatalogArgs {
    /// Write `<stem>.json` for every full-size template here.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::GroundTruth(a) => ground_truth(a),
        Command::Demo(a) => make_demo(a),
        Command::Train(a) => train(a),
        Command::Explore(a) => explore(a),
        Command::Experiment(a) => experiment(a),
        Command::Serve(a) => serve(a),
        Command::Catalog(a) => list_catalog(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}\n\nFor more information, try '--help'.");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn template(name: &str) -> Result<EnvTemplate, Failure> {
    resolve_template(name, Path::new(".")).map_err(|_| {
        let names: Vec<String> = catalog::catalog().into_iter().map(|t| t.name).collect();
        usage(format!("unknown template `{name}` (built-ins: {})", names.join(", ")))
    })
}

fn ground_truth(a: InstanceArgs) -> Result<(), Failure> {
    let t = template(&a.template)?;
    let inst = t.instantiate(a.instance_seed).context("instantiating template")?;
    let gt = ground_truth_cells(&inst);
    println!("{}", gt.count);
    print!("{}", gt.cell_map(&inst));
    Ok(())
}

fn parse_waypoints(s: &str) -> Result<Vec<CellCoord>, Failure> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (x, y) = p.split_once(',').ok_or_else(|| usage(format!("bad waypoint `{p}`")))?;
            let n = |v: &str| v.trim().parse::<usize>().map_err(|_| usage(format!("bad waypoint `{p}`")));
            Ok(CellCoord::new(n(x)?, n(y)?))
        })
        .collect()
}

fn make_demo(a: DemoArgs) -> Result<(), Failure> {
    let t = template(&a.instance.template)?;
    let inst = t.instantiate(a.instance.instance_seed).context("instantiating template")?;
    let cells = a.cells.unwrap_or(usize::MAX);
    let traj = match a.kind {
        DemoKind::Tour => demo::coverage_tour(&inst, cells, a.max_steps),
        DemoKind::Route => {
            let w = parse_waypoints(a.waypoints.as_deref().ok_or_else(|| usage("--kind route needs --waypoints"))?)?;
            demo::route_tour(&inst, &w, cells, a.max_steps)
        }
        DemoKind::Playthrough => demo::playthrough(&inst, a.max_steps),
    }
    .map_err(|e| anyhow!("scripted demo failed: {e}"))?;
    traj.save(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    let cells: std::collections::HashSet<_> =
        traj.states(&inst).context("replaying demo")?.iter().map(|s| s.agent.pos).chain([inst.start()]).collect();
    println!("{} steps, {} distinct cells -> {}", traj.len(), cells.len(), a.out.display());
    Ok(())
}

fn train(a: TrainArgs) -> Result<(), Failure> {
    let mut trajs = Vec::new();
    for p in &a.trajectory {
        trajs.push(Trajectory::load(p).with_context(|| format!("{} failed verification", p.display()))?);
    }
    let d = TrainConfig::default();
    let config = TrainConfig {
        learning_rate: a.learning_rate.unwrap_or(d.learning_rate),
        epochs: a.epochs.unwrap_or(d.epochs),
        batch_size: a.batch_size.unwrap_or(d.batch_size),
        dropout: a.dropout.unwrap_or(d.dropout),
        hidden: a.hidden.unwrap_or(d.hidden),
        seed: a.seed.unwrap_or(d.seed),
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let examples = clone::dataset(&trajs);
    let (model, report) = clone::train_examples(&examples, &config).context("training")?;
    clone::save(&model, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    let loss = report.epoch_losses.last().copied().unwrap_or(f64::NAN);
    println!(
        "{} examples, {} epochs, final loss {loss:.4}, train accuracy {:.3} -> {}",
        examples.len(),
        config.epochs,
        report.accuracy,
        a.out.display()
    );
    Ok(())
}

fn explore(a: ExploreArgs) -> Result<(), Failure> {
    let method: MethodKind = a.method.into();
    match method {
        MethodKind::Hsrrt if a.trajectory.is_none() => return Err(usage("--method hsrrt requires --trajectory")),
        MethodKind::Carrt if a.model.is_none() => return Err(usage("--method carrt requires --model")),
        _ => {}
    }
    template(&a.template)?;
    let params = ExploreParams {
        template: a.template.clone(),
        instance_seed: a.instance_seed,
        method,
        weights: a.weights,
        alpha0: a.alpha0,
        alpha_growth: a.alpha_growth,
        rollout_cap: a.rollout_cap,
        trajectory: a.trajectory.clone(),
        model: a.model.clone(),
        budget: a.budget,
        seed: a.seed,
    };
    let setup = prepare_explore(&params, Path::new(".")).map_err(|e| match e {
        HarnessError::Invalid(m) => usage(m),
        e => Failure::Runtime(e.into()),
    })?;
    let gt = ground_truth_cells(&setup.instance).count;
    let mut ex = Explorer::new(&setup.instance, setup.sampler, setup.seeds.as_ref(), setup.config)
        .context("seeding the tree")?;
    ex.run_to_end().context("exploring")?;
    let (tree, curve) = ex.into_parts();

    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_atomic(&a.out.join("curve.csv"), curve.to_csv().as_bytes())?;
    let mut dump = Vec::new();
    tree.write_jsonl(&mut dump)?;
    write_atomic(&a.out.join("tree.jsonl"), &dump)?;
    let summary = serde_json::json!({
        "schema_version": 1,
        "params": params,
        "instance_seed": setup.instance.seed,
        "ground_truth": gt,
        "seed_coverage": curve.at(0),
        "final_coverage": curve.final_count(),
        "saturation": curve.saturation_iteration(gt),
        "nodes": tree.len(),
    });
    write_atomic(&a.out.join("run.json"), format!("{}\n", serde_json::to_string_pretty(&summary).unwrap()).as_bytes())?;
    let sat = curve.saturation_iteration(gt).map_or("not reached".to_string(), |i| i.to_string());
    println!(
        "{} on {}#{}: {}/{gt} cells after {} iterations (saturation: {sat}) -> {}",
        method,
        setup.instance.template,
        setup.instance.seed,
        curve.final_count(),
        a.budget,
        a.out.display()
    );
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.manifest).with_context(|| format!("reading {}", a.manifest.display()))?;
    let mut manifest = playtest_core::harness::Manifest::from_json(&text).map_err(|e| anyhow!("{e}"))?;
    if let Some(t) = a.trials {
        manifest.trials = t;
    }
    if let Some(b) = a.budget {
        manifest.max_iter = b;
    }
    if let Some(s) = a.master_seed {
        manifest.master_seed = s;
    }
    let base = a.manifest.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut prepared = playtest_core::harness::prepare(&manifest, base).context("validating manifest")?;
    if let Some(out) = a.out {
        prepared.output_dir = out;
    }
    let (_, summary) = prepared.run_and_write().context("running experiment")?;
    let mut out = std::io::stdout().lock();
    for m in &summary.methods {
        writeln!(
            out,
            "{:<16} saturated {:>3}/{:<3} median {:>8} mean {:>8}",
            m.label,
            m.saturated,
            m.trials,
            m.median_saturation.map_or("-".into(), |v| format!("{v:.0}")),
            m.mean_saturation.map_or("-".into(), |v| format!("{v:.0}")),
        )
        .ok();
    }
    for c in &summary.comparisons {
        writeln!(
            out,
            "{} vs {}: {:.1}% fewer iterations (median over all trials{})",
            c.method,
            c.baseline,
            c.comparison.reduction_pct_all,
            if c.comparison.censored { ", censored" } else { "" }
        )
        .ok();
    }
    writeln!(out, "results -> {}", prepared.output_dir.display()).ok();
    Ok(())
}

fn serve(a: ServeArgs) -> Result<(), Failure> {
    let config = playtest_service::ServiceConfig {
        trajectory_dir: a.trajectory_dir,
        static_dir: (!a.no_ui).then_some(a.static_dir),
        ..Default::default()
    };
    let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(a.bind)
            .await
            .with_context(|| format!("binding {}", a.bind))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        playtest_service::serve(listener, config).await.context("serving")
    })?;
    Ok(())
}

fn list_catalog(a: CatalogArgs) -> Result<(), Failure> {
    for t in catalog::catalog() {
        match &a.out {
            Some(dir) => {
                let path = dir.join(format!("{}.json", catalog::file_stem(&t.name)));
                write_atomic(&path, format!("{}\n", t.to_json()).as_bytes())?;
                println!("{}", path.display());
            }
            None => println!("{:<36} {}x{}", t.name, t.width, t.height),
        }
    }
    Ok(())
}
