use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::actuation::{ActuatorParams, Morphology};
use crate::arm::{ArmParams, BallContact, Perturbation, PerturbationKind};
use crate::control::{MpcConfig, Scenario, Task};
use crate::error::{Error, Result};
use crate::objectives::{ObjectiveWeights, ReachTarget};
use crate::optimize::CmaConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    DataEfficiency,
    SigmaSweep,
    TpredSweep,
    RobustnessWeights,
    Ablation,
    BallServe,
    PdBaseline,
    LowpassBaseline,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::DataEfficiency => "data_efficiency",
            ExperimentKind::SigmaSweep => "sigma_sweep",
            ExperimentKind::TpredSweep => "tpred_sweep",
            ExperimentKind::RobustnessWeights => "robustness_weights",
            ExperimentKind::Ablation => "ablation",
            ExperimentKind::BallServe => "ball_serve",
            ExperimentKind::PdBaseline => "pd_baseline",
            ExperimentKind::LowpassBaseline => "lowpass_baseline",
        }
    }

    /// MPC experiments; the rest are open-loop CMA-ES sweeps.
    pub fn is_mpc(&self) -> bool {
        matches!(self, ExperimentKind::TpredSweep | ExperimentKind::RobustnessWeights)
    }

    fn default_task(&self) -> Task {
        match self {
            ExperimentKind::BallServe => Task::BallServe,
            _ => Task::SmoothReach,
        }
    }

    fn default_morphologies(&self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Ablation => &["muscle", "muscle-nofl", "muscle-nofv", "muscle-noactdyn"],
            ExperimentKind::PdBaseline => &["muscle", "torque", "pd"],
            ExperimentKind::LowpassBaseline => &["muscle", "torque", "lowpass-fast", "lowpass-slow"],
            _ => &["muscle", "torque"],
        }
    }

    fn default_c(&self) -> Vec<f64> {
        match self {
            ExperimentKind::DataEfficiency
            | ExperimentKind::BallServe
            | ExperimentKind::PdBaseline
            | ExperimentKind::LowpassBaseline => vec![0.05, 0.15, 0.3],
            ExperimentKind::SigmaSweep | ExperimentKind::Ablation => vec![0.3],
            ExperimentKind::TpredSweep | ExperimentKind::RobustnessWeights => Vec::new(),
        }
    }

    fn default_sigma(&self) -> Vec<f64> {
        match self {
            ExperimentKind::SigmaSweep => vec![0.05, 0.1, 0.2, 0.4],
            _ => Vec::new(),
        }
    }

    fn default_tpred(&self) -> Vec<f64> {
        match self {
            ExperimentKind::TpredSweep => vec![0.2, 0.3, 0.4, 0.5],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sweep axes. Unset axes take the experiment kind's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub c: Option<Vec<f64>>,
    pub sigma: Option<Vec<f64>>,
    pub tpred: Option<Vec<f64>>,
    /// Hidden lower-arm masses for robustness sweeps (kg).
    pub masses: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CmaSection {
    pub population: usize,
    pub generations: usize,
    pub sigma: f64,
}

impl Default for CmaSection {
    fn default() -> Self {
        let d = CmaConfig::default();
        Self { population: d.population, generations: d.generations, sigma: d.sigma }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcSection {
    pub t_pred: f64,
    pub resolution: f64,
    pub warm_start_population: usize,
    pub warm_start_generations: usize,
    pub refine_budget: usize,
    pub refine_radius: f64,
    pub refine_min_radius: f64,
}

impl Default for MpcSection {
    fn default() -> Self {
        let d = MpcConfig::default();
        Self {
            t_pred: d.t_pred,
            resolution: d.resolution,
            warm_start_population: d.warm_start.population,
            warm_start_generations: d.warm_start.generations,
            refine_budget: d.refine_budget,
            refine_radius: d.refine_radius,
            refine_min_radius: d.refine_min_radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BallSection {
    /// Release point of the ball (m).
    pub drop: [f64; 2],
    pub radius: f64,
    pub restitution: f64,
    pub floor_z: f64,
}

impl Default for BallSection {
    fn default() -> Self {
        let c = BallContact::default();
        Self {
            drop: Scenario::new(Task::BallServe).ball_drop,
            radius: c.radius,
            restitution: c.restitution,
            floor_z: c.floor_z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSection {
    /// `none`, `lower_arm_mass`, `hand_mass` or `chaotic_pendulum`.
    pub kind: String,
    pub kg: f64,
    pub radius: f64,
    pub density: f64,
    pub cable_length: f64,
    pub visible_to_prediction_model: bool,
}

impl Default for PerturbationSection {
    fn default() -> Self {
        Self {
            kind: "none".into(),
            kg: 0.0,
            radius: 0.12,
            density: 1000.0,
            cable_length: 0.6,
            visible_to_prediction_model: false,
        }
    }
}

impl PerturbationSection {
    pub fn to_perturbation(&self) -> Result<Perturbation> {
        let kind = match self.kind.as_str() {
            "none" => PerturbationKind::None,
            "lower_arm_mass" => PerturbationKind::LowerArmMass { kg: self.kg },
            "hand_mass" => PerturbationKind::HandMass { kg: self.kg },
            "chaotic_pendulum" => PerturbationKind::ChaoticPendulum {
                radius: self.radius,
                density: self.density,
                cable_length: self.cable_length,
            },
            other => return Err(Error::Config(format!("unknown perturbation kind '{other}'"))),
        };
        let p = Perturbation { kind, visible_to_prediction_model: self.visible_to_prediction_model };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { dt: 0.005 }
    }
}

/// Experiment and single-run configuration file. Every key is optional;
/// `kind` is required only by the `experiment` command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    /// Prefix of the experiment id; defaults to the kind's name.
    pub name: Option<String>,
    pub task: Option<String>,
    pub morphologies: Option<Vec<String>>,
    /// Number of seeds; seeds are `0..seeds` unless `seed_list` is given.
    pub seeds: Option<usize>,
    pub seed_list: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
    pub grid: GridConfig,
    pub cma: CmaSection,
    pub mpc: MpcSection,
    pub arm: ArmParams,
    pub actuators: ActuatorParams,
    pub weights: ObjectiveWeights,
    pub target: ReachTarget,
    pub ball: BallSection,
    pub perturbation: PerturbationSection,
    pub sim: SimSection,
}

pub const DEFAULT_SEEDS: usize = 5;

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn task(&self) -> Result<Task> {
        match &self.task {
            Some(t) => t.parse().map_err(|_| Error::Config(format!("unknown task '{t}'"))),
            None => Ok(self.kind.map_or(Task::SmoothReach, |k| k.default_task())),
        }
    }

    pub fn morphologies(&self) -> Result<Vec<Morphology>> {
        let names: Vec<String> = match (&self.morphologies, self.kind) {
            (Some(m), _) => m.clone(),
            (None, Some(k)) => k.default_morphologies().iter().map(|s| s.to_string()).collect(),
            (None, None) => vec!["muscle".into(), "torque".into()],
        };
        names.iter().map(|n| n.parse()).collect()
    }

    pub fn seeds(&self) -> Vec<u64> {
        match &self.seed_list {
            Some(list) => list.clone(),
            None => (0..self.seeds.unwrap_or(DEFAULT_SEEDS) as u64).collect(),
        }
    }

    // Explicit grid values win, then the kind's sweep, then the single value.
    fn axis(
        &self,
        set: &Option<Vec<f64>>,
        default: impl FnOnce(ExperimentKind) -> Vec<f64>,
        fallback: f64,
    ) -> Vec<f64> {
        if let Some(v) = set {
            return v.clone();
        }
        let swept = self.kind.map(default).unwrap_or_default();
        if swept.is_empty() {
            vec![fallback]
        } else {
            swept
        }
    }

    /// Control resolutions. MPC experiments default to the MPC resolution.
    pub fn c_values(&self) -> Vec<f64> {
        let fallback = if self.kind.is_some_and(|k| k.is_mpc()) { self.mpc.resolution } else { 0.3 };
        self.axis(&self.grid.c, |k| k.default_c(), fallback)
    }

    pub fn sigma_values(&self) -> Vec<f64> {
        self.axis(&self.grid.sigma, |k| k.default_sigma(), self.cma.sigma)
    }

    pub fn tpred_values(&self) -> Vec<f64> {
        self.axis(&self.grid.tpred, |k| k.default_tpred(), self.mpc.t_pred)
    }

    pub fn mass_values(&self) -> Vec<f64> {
        self.grid.masses.clone().unwrap_or_else(|| match self.kind {
            Some(ExperimentKind::RobustnessWeights) => vec![1.0, 2.0, 3.0, 4.0, 5.0],
            _ => Vec::new(),
        })
    }

    /// Scenario for `task` with every physical override applied.
    pub fn scenario(&self, task: Task) -> Result<Scenario> {
        let mut scn = Scenario::new(task);
        scn.arm = self.arm;
        scn.actuators = self.actuators;
        scn.weights = self.weights;
        scn.target = self.target;
        scn.ball_drop = self.ball.drop;
        scn.contact =
            BallContact { radius: self.ball.radius, restitution: self.ball.restitution, floor_z: self.ball.floor_z };
        scn.perturbation = self.perturbation.to_perturbation()?;
        scn.dt = self.sim.dt;
        scn.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(scn)
    }

    pub fn cma_config(&self, sigma: f64, seed: u64) -> CmaConfig {
        CmaConfig {
            population: self.cma.population,
            generations: self.cma.generations,
            sigma,
            seed,
            ..CmaConfig::default()
        }
    }

    pub fn mpc_config(&self, t_pred: f64, sigma: f64, seed: u64) -> MpcConfig {
        MpcConfig {
            t_pred,
            resolution: self.mpc.resolution,
            warm_start: CmaConfig {
                population: self.mpc.warm_start_population,
                generations: self.mpc.warm_start_generations,
                sigma,
                seed,
                ..CmaConfig::default()
            },
            refine_budget: self.mpc.refine_budget,
            refine_radius: self.mpc.refine_radius,
            refine_min_radius: self.mpc.refine_min_radius,
        }
    }

    /// Checks everything that can be checked without running anything.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let task = self.task()?;
        self.scenario(task)?;
        if self.morphologies()?.is_empty() {
            return bad("morphology list is empty".into());
        }
        let seeds = self.seeds();
        if seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return bad("seed list has duplicates".into());
        }
        let mut axes = vec![("c", self.c_values()), ("sigma", self.sigma_values()), ("tpred", self.tpred_values())];
        if self.kind == Some(ExperimentKind::RobustnessWeights) {
            axes.push(("masses", self.mass_values()));
        }
        for (name, values) in axes {
            if values.is_empty() {
                return bad(format!("grid.{name} is empty"));
            }
            if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return bad(format!("grid.{name} values must be positive"));
            }
        }
        for &sigma in &self.sigma_values() {
            self.cma_config(sigma, 0).validate().map_err(|e| Error::Config(e.to_string()))?;
            for &tp in &self.tpred_values() {
                self.mpc_config(tp, sigma, 0).validate().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }
}
