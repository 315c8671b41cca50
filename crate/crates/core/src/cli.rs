//! The `myoarm` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::actuation::{AblationFlags, Morphology};
use crate::control::{calibrate_torque_limits, rollout, RolloutResult, Task, ZohPlan};
use crate::harness::{
    ensure_writable, run_experiment, run_mpc, run_open_loop, summarize, trace_path, write_mpc_run, write_summary,
    write_trace, write_trajectory, ExperimentConfig, RunKey, RunSpec,
};
use crate::optimize::ControlParameterization;
use crate::Error;

#[derive(Parser, Debug)]
#[command(name = "myoarm", version, about = "Two-link arm actuator morphology benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Roll out a seeded random zero-order-hold plan and print its trajectory.
    Simulate(RunArgs),
    /// Optimize one open-loop control sequence with CMA-ES.
    Optimize(RunArgs),
    /// Run receding-horizon control on the plant.
    Mpc(RunArgs),
    /// Run an experiment grid from a config file.
    Experiment(ExperimentArgs),
    /// Rebuild aggregate.csv from the trace files in a directory.
    Summarize {
        /// Experiment output directory.
        dir: PathBuf,
    },
    /// Peak joint torques of optimized muscle rollouts, per joint.
    CalibrateTorque(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Ablation {
    Fl,
    Fv,
    Actdyn,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (simulate) or directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "muscle")]
    morphology: String,
    /// smooth-reach, precise-reach, fast-reach or ball-serve.
    #[arg(long)]
    task: Option<String>,
    /// Disable a muscle component; repeatable.
    #[arg(long, value_enum)]
    ablate: Vec<Ablation>,
    /// Control resolution c (s).
    #[arg(long)]
    resolution: Option<f64>,
    /// Initial CMA-ES step size.
    #[arg(long)]
    sigma: Option<f64>,
    /// MPC prediction horizon (s).
    #[arg(long)]
    tpred: Option<f64>,
    /// Worker threads.
    #[arg(long, env = "MYOARM_JOBS")]
    jobs: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `out`, then results/<kind>.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "MYOARM_JOBS")]
    jobs: Option<usize>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(anyhow::Error),
    Diverged(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.into())
    }
}

/// Runs the command line on `args` (including the program name) and returns
/// the process exit code: 0 on success, 1 on usage or config errors, 2 when a
/// single run diverges.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            1
        }
        Err(Failure::Diverged(msg)) => {
            eprintln!("diverged: {msg}");
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Simulate(a) => simulate(&a),
        Command::Optimize(a) => optimize(&a),
        Command::Mpc(a) => mpc(&a),
        Command::Experiment(a) => experiment(&a),
        Command::Summarize { dir } => {
            let rows = summarize(&dir)?;
            println!("wrote {} ({} rows)", dir.join("aggregate.csv").display(), rows.len());
            Ok(())
        }
        Command::CalibrateTorque(a) => calibrate(&a),
    }
}

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<ExperimentConfig> {
    let cfg = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    Ok(cfg)
}

/// Resolves the single run described by the flags and config.
fn single_spec(a: &RunArgs, cfg: &ExperimentConfig, mpc: bool) -> anyhow::Result<RunSpec> {
    if a.jobs == Some(0) {
        bail!("--jobs must be >= 1");
    }
    let task: Task = match &a.task {
        Some(t) => t.parse()?,
        None => cfg.task()?,
    };
    let mut flags = AblationFlags::default();
    for ab in &a.ablate {
        match ab {
            Ablation::Fl => flags.disable_fl = true,
            Ablation::Fv => flags.disable_fv = true,
            Ablation::Actdyn => flags.disable_activation = true,
        }
    }
    let base: Morphology = a.morphology.parse()?;
    if flags.any() && !base.is_muscle() {
        bail!("--ablate applies only to muscle morphologies, got '{}'", a.morphology);
    }
    let morphology = if flags.any() { base.with_ablation(flags) } else { base };
    let c = match a.resolution {
        Some(c) => c,
        None if mpc => cfg.mpc.resolution,
        None => cfg.c_values()[0],
    };
    let sigma = a.sigma.unwrap_or(cfg.cma.sigma);
    for (name, v) in [("resolution", c), ("sigma", sigma)] {
        if v.is_nan() || v <= 0.0 || v.is_infinite() {
            bail!("--{name} must be > 0, got {v}");
        }
    }
    let tpred = mpc.then(|| a.tpred.unwrap_or(cfg.mpc.t_pred));
    Ok(RunSpec {
        key: RunKey {
            experiment: cfg.name.clone().unwrap_or_else(|| "single".into()),
            task: task.name().to_string(),
            morphology: morphology.to_string(),
            c,
            sigma,
            tpred,
            seed: a.seed,
        },
        task,
        morphology,
        hidden_mass: None,
    })
}

fn install_jobs(jobs: Option<usize>) {
    if let Some(j) = jobs {
        // Fails only if a global pool already exists, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
}

fn out_dir(a: &RunArgs, cfg: &ExperimentConfig, default: &str) -> PathBuf {
    a.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from(default))
}

fn simulate(a: &RunArgs) -> Result<(), Failure> {
    let cfg = load_config(&a.config)?;
    let spec = single_spec(a, &cfg, false)?;
    let scn = spec.scenario(&cfg)?;
    let sim = scn.initial_sim(spec.morphology)?;
    let layout = ControlParameterization::new(
        spec.task.horizon(),
        spec.key.c,
        sim.controller.control_dim(),
        sim.controller.control_bounds(),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (lo, hi) = layout.bounds;
    let theta: Vec<f64> = (0..layout.dim()).map(|_| rng.random_range(lo..hi)).collect();
    let result = rollout(&scn, spec.morphology, &ZohPlan { layout: &layout, theta: &theta }, true)?;
    match &a.out {
        Some(path) => {
            let file = std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            write_trajectory(std::io::BufWriter::new(file), &result.trajectory)?;
        }
        None => write_trajectory(std::io::stdout().lock(), &result.trajectory)?,
    }
    eprintln!("cost {}", result.cost);
    check_diverged(&result, "simulation")
}

fn check_diverged(result: &RolloutResult, what: &str) -> Result<(), Failure> {
    if result.diverged() {
        return Err(Failure::Diverged(format!("{what} diverged after {} steps", result.steps)));
    }
    Ok(())
}

fn optimize(a: &RunArgs) -> Result<(), Failure> {
    let cfg = load_config(&a.config)?;
    let spec = single_spec(a, &cfg, false)?;
    let dir = out_dir(a, &cfg, "results/optimize");
    ensure_writable(&dir)?;
    install_jobs(a.jobs);
    let run = run_open_loop(&cfg, &spec)?;
    write_trace(&trace_path(&dir, &spec.key), &run.trace)?;
    let traj_path = dir.join(format!("trajectory_{}.csv", spec.key.stem()));
    write_trajectory(std::io::BufWriter::new(std::fs::File::create(&traj_path)?), &run.result.best.trajectory)?;
    println!("best cost {} after {} evaluations", run.result.best.cost, run.result.trace.total_evaluations());
    println!("wrote {}", dir.display());
    check_diverged(&run.result.best, "optimized rollout")
}

fn mpc(a: &RunArgs) -> Result<(), Failure> {
    let cfg = load_config(&a.config)?;
    let spec = single_spec(a, &cfg, true)?;
    let dir = out_dir(a, &cfg, "results/mpc");
    ensure_writable(&dir)?;
    install_jobs(a.jobs);
    let run = run_mpc(&cfg, &spec)?;
    write_mpc_run(&dir, &run)?;
    write_summary(&dir.join("summary.csv"), std::slice::from_ref(&run.summary))?;
    println!(
        "executed cost {} after {} evaluations, elbow overshoot {}",
        run.summary.final_cost, run.summary.evals, run.summary.overshoot
    );
    println!("wrote {}", dir.display());
    check_diverged(&run.result.executed, "plant")
}

fn experiment(a: &ExperimentArgs) -> Result<(), Failure> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let kind = cfg.kind.ok_or_else(|| anyhow::anyhow!("experiment config needs 'kind'"))?;
    if a.jobs == Some(0) {
        return Err(anyhow::anyhow!("--jobs must be >= 1").into());
    }
    let dir = a.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| Path::new("results").join(kind.name()));
    let report = run_experiment(&cfg, &dir, a.jobs)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(
        stdout,
        "{} runs, {} diverged, {} files in {}",
        report.runs,
        report.diverged,
        report.files.len(),
        dir.display()
    )
    .context("stdout")?;
    Ok(())
}

fn calibrate(a: &RunArgs) -> Result<(), Failure> {
    let cfg = load_config(&a.config)?;
    let mut spec = single_spec(a, &cfg, false)?;
    if !spec.morphology.is_muscle() {
        return Err(anyhow::anyhow!("calibration needs a muscle morphology").into());
    }
    install_jobs(a.jobs);
    let mut best = Vec::new();
    for seed in cfg.seeds() {
        spec.key.seed = seed;
        let run = run_open_loop(&cfg, &spec)?;
        if !run.diverged() {
            best.push(run.result.best);
        }
    }
    let tau = calibrate_torque_limits(&best)?;
    let text = format!("[actuators]\ntau_max = [{}, {}]\n", tau[0], tau[1]);
    match &a.out {
        Some(path) => std::fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
