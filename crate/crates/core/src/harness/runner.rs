use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::records::{
    aggregate, read_summary, read_trace, trace_files, write_aggregate, write_cost_series, write_summary, write_trace,
    write_trajectory, AggregateRow, CostRecord, RunKey, SummaryRow, TraceRow,
};
use crate::actuation::Morphology;
use crate::arm::{Perturbation, PerturbationKind};
use crate::control::{elbow_overshoot, mpc_run, open_loop_optimize, MpcResult, OpenLoopResult, Scenario, Task};
use crate::error::{Error, Result};
use crate::DIVERGED_COST;

/// One point of an experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub key: RunKey,
    pub task: Task,
    pub morphology: Morphology,
    /// Hidden lower-arm mass for robustness runs (kg).
    pub hidden_mass: Option<f64>,
}

impl RunSpec {
    pub fn scenario(&self, cfg: &ExperimentConfig) -> Result<Scenario> {
        let mut scn = cfg.scenario(self.task)?;
        if let Some(kg) = self.hidden_mass {
            scn.perturbation = Perturbation::hidden(PerturbationKind::LowerArmMass { kg });
        }
        Ok(scn)
    }

    pub fn is_mpc(&self) -> bool {
        self.key.tpred.is_some()
    }

    /// Objective evaluations the run is allowed, known before it starts.
    pub fn planned_evaluations(&self, cfg: &ExperimentConfig) -> Result<usize> {
        match self.key.tpred {
            None => Ok(cfg.cma.population * cfg.cma.generations),
            Some(tp) => {
                let scn = self.scenario(cfg)?;
                let mpc = cfg.mpc_config(tp, self.key.sigma, self.key.seed);
                let per_control = crate::control::steps_for(self.key.c, scn.dt);
                Ok(mpc.evaluation_budget(scn.horizon_steps().div_ceil(per_control)))
            }
        }
    }
}

pub struct OpenLoopRun {
    pub spec: RunSpec,
    pub result: OpenLoopResult,
    pub trace: Vec<TraceRow>,
}

impl OpenLoopRun {
    pub fn diverged(&self) -> bool {
        self.result.best.diverged()
    }
}

pub struct MpcRun {
    pub spec: RunSpec,
    pub result: MpcResult,
    pub summary: SummaryRow,
}

impl MpcRun {
    pub fn diverged(&self) -> bool {
        self.summary.diverged
    }
}

pub enum RunOutcome {
    OpenLoop(OpenLoopRun),
    Mpc(MpcRun),
}

/// Experiment id, with the hidden mass appended for robustness sweeps.
fn experiment_id(cfg: &ExperimentConfig, kind: ExperimentKind, mass: Option<f64>) -> String {
    let base = cfg.name.clone().unwrap_or_else(|| kind.name().to_string());
    match mass {
        Some(m) => format!("{base}_m{m}"),
        None => base,
    }
}

/// Expands the grid of an experiment configuration into runs.
pub fn expand(cfg: &ExperimentConfig) -> Result<Vec<RunSpec>> {
    let kind = cfg.kind.ok_or_else(|| Error::Config("experiment config needs 'kind'".into()))?;
    cfg.validate()?;
    let task = cfg.task()?;
    let masses: Vec<Option<f64>> = if kind == ExperimentKind::RobustnessWeights {
        cfg.mass_values().into_iter().map(Some).collect()
    } else {
        vec![None]
    };
    let tpreds: Vec<Option<f64>> =
        if kind.is_mpc() { cfg.tpred_values().into_iter().map(Some).collect() } else { vec![None] };
    let mut specs = Vec::new();
    for &mass in &masses {
        for morphology in cfg.morphologies()? {
            for &c in &cfg.c_values() {
                for &sigma in &cfg.sigma_values() {
                    for &tpred in &tpreds {
                        for seed in cfg.seeds() {
                            specs.push(RunSpec {
                                key: RunKey {
                                    experiment: experiment_id(cfg, kind, mass),
                                    task: task.name().to_string(),
                                    morphology: morphology.to_string(),
                                    c,
                                    sigma,
                                    tpred,
                                    seed,
                                },
                                task,
                                morphology,
                                hidden_mass: mass,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(specs)
}

/// Rejects grids where morphologies sharing a cell would get different budgets.
pub fn check_budget_parity(cfg: &ExperimentConfig, specs: &[RunSpec]) -> Result<()> {
    let mut budgets: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for s in specs {
        let k = &s.key;
        let cell = format!("{}|{}|{}|{}|{:?}|{}", k.experiment, k.task, k.c, k.sigma, k.tpred, k.seed);
        let b = s.planned_evaluations(cfg)?;
        match budgets.get(&cell) {
            Some((b0, m0)) if *b0 != b => {
                return Err(Error::Config(format!(
                    "budget parity violated in {cell}: {m0} gets {b0} evaluations, {} gets {b}",
                    k.morphology
                )))
            }
            Some(_) => {}
            None => {
                budgets.insert(cell, (b, k.morphology.clone()));
            }
        }
    }
    Ok(())
}

pub fn run_open_loop(cfg: &ExperimentConfig, spec: &RunSpec) -> Result<OpenLoopRun> {
    let scn = spec.scenario(cfg)?;
    let result = open_loop_optimize(&scn, spec.morphology, spec.key.c, &cfg.cma_config(spec.key.sigma, spec.key.seed))?;
    let trace = result
        .trace
        .generations
        .iter()
        .map(|g| TraceRow {
            key: spec.key.clone(),
            gen: g.generation,
            best_cost: g.best_cost,
            evals: g.evaluations,
            diverged: g.best_cost == DIVERGED_COST,
        })
        .collect();
    Ok(OpenLoopRun { spec: spec.clone(), result, trace })
}

pub fn run_mpc(cfg: &ExperimentConfig, spec: &RunSpec) -> Result<MpcRun> {
    let tpred = spec.key.tpred.ok_or_else(|| Error::Config("MPC run needs a prediction horizon".into()))?;
    let scn = spec.scenario(cfg)?;
    let mut mpc = cfg.mpc_config(tpred, spec.key.sigma, spec.key.seed);
    mpc.resolution = spec.key.c;
    let result = mpc_run(&scn, spec.morphology, &mpc)?;
    let executed = &result.executed;
    let summary = SummaryRow {
        key: spec.key.clone(),
        final_cost: executed.cost,
        evals: result.evaluations,
        overshoot: elbow_overshoot(&executed.trajectory.theta, scn.target.theta_des[1]),
        diverged: executed.diverged(),
    };
    Ok(MpcRun { spec: spec.clone(), result, summary })
}

pub fn run(cfg: &ExperimentConfig, spec: &RunSpec) -> Result<RunOutcome> {
    if spec.is_mpc() {
        run_mpc(cfg, spec).map(RunOutcome::Mpc)
    } else {
        run_open_loop(cfg, spec).map(RunOutcome::OpenLoop)
    }
}

/// Creates `dir` and proves it writable before any compute is spent.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    let fail = |e: std::io::Error| Error::Config(format!("output directory {} is not writable: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(fail)?;
    let probe = dir.join(".myoarm-write-probe");
    std::fs::write(&probe, b"").map_err(fail)?;
    std::fs::remove_file(&probe).map_err(fail)?;
    Ok(())
}

pub fn trace_path(dir: &Path, key: &RunKey) -> PathBuf {
    dir.join(format!("trace_{}.csv", key.stem()))
}

pub fn write_mpc_run(dir: &Path, run: &MpcRun) -> Result<()> {
    let stem = run.spec.key.stem();
    let costs: Vec<_> = run.result.steps.iter().map(|s| (s.t, s.shifted_cost, s.plan_cost, s.evaluations)).collect();
    write_cost_series(&dir.join(format!("cost_{stem}.csv")), &costs)?;
    let file = File::create(dir.join(format!("trajectory_{stem}.csv")))?;
    write_trajectory(BufWriter::new(file), &run.result.executed.trajectory)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub runs: usize,
    pub diverged: usize,
    pub aggregate: Vec<AggregateRow>,
    pub files: Vec<PathBuf>,
}

/// Runs every grid point in parallel and writes per-run files plus
/// `aggregate.csv` into `out`. Output depends only on the configuration.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, jobs: Option<usize>) -> Result<ExperimentReport> {
    let specs = expand(cfg)?;
    check_budget_parity(cfg, &specs)?;
    ensure_writable(out)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    log::info!("running {} runs into {}", specs.len(), out.display());

    let outcomes: Vec<RunOutcome> = pool.install(|| {
        specs
            .par_iter()
            .map(|spec| {
                let r = run(cfg, spec);
                if let Ok(o) = &r {
                    log::info!("finished {} (diverged: {})", spec.key.stem(), outcome_diverged(o));
                }
                r
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut files = Vec::new();
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for outcome in &outcomes {
        match outcome {
            RunOutcome::OpenLoop(r) => {
                let planned = r.spec.planned_evaluations(cfg)?;
                let used = r.result.trace.total_evaluations();
                if used != planned {
                    return Err(Error::Config(format!(
                        "{} used {used} evaluations, planned {planned}",
                        r.spec.key.stem()
                    )));
                }
                let path = trace_path(out, &r.spec.key);
                write_trace(&path, &r.trace)?;
                files.push(path);
                records.extend(r.trace.iter().map(CostRecord::from));
            }
            RunOutcome::Mpc(r) => {
                write_mpc_run(out, r)?;
                records.push(CostRecord::from(&r.summary));
                summaries.push(r.summary.clone());
            }
        }
    }
    if !summaries.is_empty() {
        let path = out.join("summary.csv");
        write_summary(&path, &summaries)?;
        files.push(path);
    }
    let agg = aggregate(&records);
    let path = out.join("aggregate.csv");
    write_aggregate(&path, &agg)?;
    files.push(path);
    Ok(ExperimentReport {
        runs: outcomes.len(),
        diverged: outcomes.iter().filter(|o| outcome_diverged(o)).count(),
        aggregate: agg,
        files,
    })
}

fn outcome_diverged(o: &RunOutcome) -> bool {
    match o {
        RunOutcome::OpenLoop(r) => r.diverged(),
        RunOutcome::Mpc(r) => r.diverged(),
    }
}

/// Rebuilds `aggregate.csv` in `dir` from its trace files and `summary.csv`.
pub fn summarize(dir: &Path) -> Result<Vec<AggregateRow>> {
    let mut records = Vec::new();
    for path in trace_files(dir)? {
        records.extend(read_trace(&path)?.iter().map(CostRecord::from));
    }
    let summary = dir.join("summary.csv");
    if summary.is_file() {
        records.extend(read_summary(&summary)?.iter().map(CostRecord::from));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput("trace or summary files"));
    }
    let agg = aggregate(&records);
    write_aggregate(&dir.join("aggregate.csv"), &agg)?;
    Ok(agg)
}
