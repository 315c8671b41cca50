use std::cmp::Ordering;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::control::Trajectory;
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "experiment,task,morphology,c,sigma,tpred,seed,gen,best_cost,evals,diverged";
pub const SUMMARY_HEADER: &str = "experiment,task,morphology,c,sigma,tpred,seed,final_cost,evals,overshoot,diverged";
pub const AGGREGATE_HEADER: &str = "experiment,task,morphology,c,sigma,tpred,gen,n,n_diverged,mean,std,min,max,evals";
pub const COST_HEADER: &str = "t,shifted_cost,plan_cost,evals";

/// Identifies one run of an experiment grid.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RunKey {
    pub experiment: String,
    pub task: String,
    pub morphology: String,
    pub c: f64,
    pub sigma: f64,
    /// Prediction horizon; absent for open-loop runs.
    pub tpred: Option<f64>,
    pub seed: u64,
}

impl RunKey {
    /// File-name stem unique within an experiment directory.
    pub fn stem(&self) -> String {
        let mut s = format!("{}_{}_c{}_s{}", self.experiment, self.morphology, self.c, self.sigma);
        if let Some(tp) = self.tpred {
            s.push_str(&format!("_tp{tp}"));
        }
        s.push_str(&format!("_seed{}", self.seed));
        s
    }

    fn prefix(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.experiment,
            self.task,
            self.morphology,
            self.c,
            self.sigma,
            opt(self.tpred),
            self.seed
        )
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Best-so-far cost of one open-loop run after one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub key: RunKey,
    pub gen: usize,
    pub best_cost: f64,
    pub evals: usize,
    pub diverged: bool,
}

/// Outcome of one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub key: RunKey,
    pub final_cost: f64,
    pub evals: usize,
    pub overshoot: f64,
    pub diverged: bool,
}

/// A cost sample entering the aggregate. `gen` is `None` for final costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRecord {
    pub key: RunKey,
    pub gen: Option<usize>,
    pub cost: f64,
    pub evals: usize,
    pub diverged: bool,
}

impl From<&TraceRow> for CostRecord {
    fn from(r: &TraceRow) -> Self {
        Self { key: r.key.clone(), gen: Some(r.gen), cost: r.best_cost, evals: r.evals, diverged: r.diverged }
    }
}

impl From<&SummaryRow> for CostRecord {
    fn from(r: &SummaryRow) -> Self {
        Self { key: r.key.clone(), gen: None, cost: r.final_cost, evals: r.evals, diverged: r.diverged }
    }
}

/// Statistics of one grid cell over seeds. Diverged runs are counted but
/// excluded from the statistics, which are `None` if nothing is left.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub experiment: String,
    pub task: String,
    pub morphology: String,
    pub c: f64,
    pub sigma: f64,
    pub tpred: Option<f64>,
    pub gen: Option<usize>,
    pub n: usize,
    pub n_diverged: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub evals: usize,
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut text = format!("{TRACE_HEADER}\n");
    for r in rows {
        text.push_str(&format!("{},{},{},{},{}\n", r.key.prefix(), r.gen, r.best_cost, r.evals, r.diverged));
    }
    write_file(path, &text)
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut text = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        text.push_str(&format!("{},{},{},{},{}\n", r.key.prefix(), r.final_cost, r.evals, r.overshoot, r.diverged));
    }
    write_file(path, &text)
}

pub fn write_cost_series(path: &Path, rows: &[(f64, f64, f64, usize)]) -> Result<()> {
    let mut text = format!("{COST_HEADER}\n");
    for (t, shifted, plan, evals) in rows {
        text.push_str(&format!("{t},{shifted},{plan},{evals}\n"));
    }
    write_file(path, &text)
}

pub fn trajectory_header(n_u: usize) -> String {
    let mut h = String::from("t,theta1,theta2,dtheta1,dtheta2");
    for i in 1..=n_u {
        h.push_str(&format!(",u{i}"));
    }
    h.push_str(",tau1,tau2");
    h
}

/// Physics-rate trajectory, one row per step.
pub fn write_trajectory<W: Write>(mut out: W, traj: &Trajectory) -> Result<()> {
    let n_u = traj.u.first().map_or(0, Vec::len);
    writeln!(out, "{}", trajectory_header(n_u))?;
    for k in 0..traj.len() {
        let [q1, q2] = traj.theta[k];
        let [w1, w2] = traj.dtheta[k];
        let mut line = format!("{},{q1},{q2},{w1},{w2}", traj.t[k]);
        for u in &traj.u[k] {
            line.push_str(&format!(",{u}"));
        }
        let [t1, t2] = traj.tau[k];
        line.push_str(&format!(",{t1},{t2}"));
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

// The csv crate cannot deserialize numbers through `serde(flatten)`, so files
// are read into flat rows first.
#[derive(Deserialize)]
struct FlatRow {
    experiment: String,
    task: String,
    morphology: String,
    c: f64,
    sigma: f64,
    tpred: Option<f64>,
    seed: u64,
    gen: Option<usize>,
    best_cost: Option<f64>,
    final_cost: Option<f64>,
    evals: usize,
    overshoot: Option<f64>,
    diverged: bool,
}

impl FlatRow {
    fn key(&self) -> RunKey {
        RunKey {
            experiment: self.experiment.clone(),
            task: self.task.clone(),
            morphology: self.morphology.clone(),
            c: self.c,
            sigma: self.sigma,
            tpred: self.tpred,
            seed: self.seed,
        }
    }
}

fn missing(path: &Path, column: &str) -> Error {
    Error::Config(format!("{}: missing column '{column}'", path.display()))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    read_rows::<FlatRow>(path)?
        .into_iter()
        .map(|r| {
            Ok(TraceRow {
                key: r.key(),
                gen: r.gen.ok_or_else(|| missing(path, "gen"))?,
                best_cost: r.best_cost.ok_or_else(|| missing(path, "best_cost"))?,
                evals: r.evals,
                diverged: r.diverged,
            })
        })
        .collect()
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows::<FlatRow>(path)?
        .into_iter()
        .map(|r| {
            Ok(SummaryRow {
                key: r.key(),
                final_cost: r.final_cost.ok_or_else(|| missing(path, "final_cost"))?,
                evals: r.evals,
                overshoot: r.overshoot.ok_or_else(|| missing(path, "overshoot"))?,
                diverged: r.diverged,
            })
        })
        .collect()
}

/// `trace_*.csv` files in `dir`, sorted by name.
pub fn trace_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("trace_") && name.ends_with(".csv") && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn key_order(a: &CostRecord, b: &CostRecord) -> Ordering {
    let (x, y) = (&a.key, &b.key);
    x.experiment
        .cmp(&y.experiment)
        .then_with(|| x.task.cmp(&y.task))
        .then_with(|| x.morphology.cmp(&y.morphology))
        .then_with(|| x.c.total_cmp(&y.c))
        .then_with(|| x.sigma.total_cmp(&y.sigma))
        .then_with(|| x.tpred.unwrap_or(-1.0).total_cmp(&y.tpred.unwrap_or(-1.0)))
        .then_with(|| a.gen.cmp(&b.gen))
}

/// Groups records by grid cell and generation, in a canonical order that does
/// not depend on the input order.
pub fn aggregate(records: &[CostRecord]) -> Vec<AggregateRow> {
    let mut sorted: Vec<&CostRecord> = records.iter().collect();
    sorted.sort_by(|a, b| key_order(a, b).then_with(|| a.key.seed.cmp(&b.key.seed)));
    let mut out = Vec::new();
    for group in sorted.chunk_by(|a, b| key_order(a, b) == Ordering::Equal) {
        let first = group[0];
        let ok: Vec<f64> = group.iter().filter(|r| !r.diverged).map(|r| r.cost).collect();
        let (mean, std) = mean_std(&ok);
        out.push(AggregateRow {
            experiment: first.key.experiment.clone(),
            task: first.key.task.clone(),
            morphology: first.key.morphology.clone(),
            c: first.key.c,
            sigma: first.key.sigma,
            tpred: first.key.tpred,
            gen: first.gen,
            n: group.len(),
            n_diverged: group.len() - ok.len(),
            mean,
            std,
            min: ok.iter().copied().reduce(f64::min),
            max: ok.iter().copied().reduce(f64::max),
            evals: group.iter().map(|r| r.evals).max().unwrap_or(0),
        });
    }
    out
}

/// Sample mean and standard deviation (n - 1 denominator, 0 for one sample).
pub fn mean_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), Some(0.0));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut text = format!("{AGGREGATE_HEADER}\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.experiment,
            r.task,
            r.morphology,
            r.c,
            r.sigma,
            opt(r.tpred),
            r.gen.map(|g| g.to_string()).unwrap_or_default(),
            r.n,
            r.n_diverged,
            opt(r.mean),
            opt(r.std),
            opt(r.min),
            opt(r.max),
            r.evals
        ));
    }
    write_file(path, &text)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct AggregateCsvRow {
    pub experiment: String,
    pub task: String,
    pub morphology: String,
    pub c: f64,
    pub sigma: f64,
    pub tpred: Option<f64>,
    pub gen: Option<usize>,
    pub n: usize,
    pub n_diverged: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub evals: usize,
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateCsvRow>> {
    read_rows(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(morph: &str, seed: u64, gen: usize, cost: f64, diverged: bool) -> CostRecord {
        CostRecord {
            key: RunKey {
                experiment: "e".into(),
                task: "smooth-reach".into(),
                morphology: morph.into(),
                c: 0.3,
                sigma: 0.2,
                tpred: None,
                seed,
            },
            gen: Some(gen),
            cost,
            evals: 36 * (gen + 1),
            diverged,
        }
    }

    #[test]
    fn aggregate_is_order_independent() {
        let mut recs = vec![
            rec("torque", 1, 0, 3.0, false),
            rec("muscle", 0, 0, 1.0, false),
            rec("muscle", 1, 0, 2.0, false),
            rec("muscle", 2, 0, 1e9, true),
            rec("muscle", 0, 1, 0.5, false),
        ];
        let a = aggregate(&recs);
        recs.reverse();
        assert_eq!(a, aggregate(&recs));
        assert_eq!(a.len(), 3);
        assert_eq!((a[0].morphology.as_str(), a[0].gen, a[0].n, a[0].n_diverged), ("muscle", Some(0), 3, 1));
        assert_eq!(a[0].mean, Some(1.5));
        assert_eq!(a[0].max, Some(2.0));
        assert_eq!(a[1].std, Some(0.0));
        assert_eq!(a[2].morphology, "torque");
    }

    #[test]
    fn all_diverged_leaves_statistics_empty() {
        let a = aggregate(&[rec("muscle", 0, 0, 1e9, true)]);
        assert_eq!((a[0].mean, a[0].std, a[0].n_diverged), (None, None, 1));
    }

    #[test]
    fn stem_is_unique_per_axis() {
        let k = rec("muscle", 3, 0, 0.0, false).key;
        assert_eq!(k.stem(), "e_muscle_c0.3_s0.2_seed3");
        let k = RunKey { tpred: Some(0.4), ..k };
        assert_eq!(k.stem(), "e_muscle_c0.3_s0.2_tp0.4_seed3");
    }
}
