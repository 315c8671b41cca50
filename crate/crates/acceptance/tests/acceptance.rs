//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Heavy criteria run full-budget experiment grids.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use common::{fd_lagrangian_accel, mean_std, passive_energy_series, rel_err, trend_per_second};
use myoarm::actuation::{activation_step, derive_linear_map, fiber_kinematics, LENGTH_MAP_EPSILON};
use myoarm::arm::{forward_dynamics, ArmParams, ArmState};
use myoarm::harness::{expand, read_aggregate, run_experiment, run_mpc, AggregateCsvRow, ExperimentConfig};
use myoarm::objectives::{hopping_reward, precise_reaching_reward, ObjectiveWeights};
use myoarm::optimize::{cma_es, CmaConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn preset(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn activation_exactness() -> Outcome {
    let (dt, tau_a) = (0.001, 0.01);
    let mut worst: f64 = 0.0;
    let mut report = Vec::new();
    for (a0, u) in [(0.0, 1.0), (1.0, 0.0), (0.2, 0.7)] {
        let mut a = a0;
        let mut k = 0;
        for m in [1, 3, 5] {
            let steps = (m as f64 * tau_a / dt).round() as usize;
            while k < steps {
                a = activation_step(a, u, dt, tau_a);
                k += 1;
            }
            let exact = u + (a0 - u) * (-(m as f64)).exp();
            let err = (a - exact).abs() / exact.abs();
            worst = worst.max(err);
            if a0 == 0.0 {
                report.push(format!("{m}dt_a: {:.2}%", 100.0 * err));
            }
        }
    }
    outcome(worst <= 0.01, format!("worst relative error {:.2}% ({})", 100.0 * worst, report.join(", ")))
}

fn parametrization_fidelity() -> Outcome {
    let mut worst: f64 = 0.0;
    for (phi_min, phi_max, l_min, l_max) in [
        (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2, 0.75, 1.05),
        (-1.0, 2.0, 0.6, 1.2),
        (0.0, 0.5, 0.9, 1.0),
    ] {
        let map = derive_linear_map(phi_min, phi_max, l_min, l_max).unwrap();
        let m1 = (l_max - l_min) / (phi_max - phi_min + LENGTH_MAP_EPSILON);
        let (lo, _) = fiber_kinematics(phi_min, 0.0, map.m[0], map.l_ref[0]);
        let (hi, _) = fiber_kinematics(phi_max, 0.0, map.m[0], map.l_ref[0]);
        let (lo2, _) = fiber_kinematics(phi_max, 0.0, map.m[1], map.l_ref[1]);
        worst = worst
            .max((lo - l_min).abs())
            .max((lo2 - l_min).abs())
            .max((hi - (l_min + m1 * (phi_max - phi_min))).abs())
            .max((hi - (l_max - m1 * LENGTH_MAP_EPSILON)).abs());
    }
    outcome(worst <= 1e-12, format!("max deviation from direct substitution {worst:.1e}"))
}

fn dynamics_oracle() -> Outcome {
    let p = ArmParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s = ArmState {
            theta: [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
            dtheta: [rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0)],
            pendulum: None,
            t: 0.0,
        };
        let tau = [rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0)];
        let acc = forward_dynamics(&s, tau, &p).unwrap();
        worst = worst.max(rel_err(acc, fd_lagrangian_accel(s.theta, s.dtheta, tau, &p)));
    }
    let drift = trend_per_second(&passive_energy_series(1.0)).abs();
    outcome(
        worst <= 1e-4 && drift < 5e-3,
        format!("oracle rel. error {worst:.1e} (<= 1e-4), energy drift {:.3}%/s (< 0.5%/s)", 100.0 * drift),
    )
}

fn cma_sphere() -> Outcome {
    let sphere = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let costs: Vec<f64> = (0..5)
        .map(|seed| {
            let cfg = CmaConfig {
                population: 36,
                generations: 100,
                sigma: 0.3,
                seed,
                initial_mean: Some(vec![0.3; 10]),
                bounds: None,
            };
            cma_es(sphere, 10, &cfg).unwrap().best_cost
        })
        .collect();
    let hits = costs.iter().filter(|c| **c < 1e-10).count();
    outcome(hits == 5, format!("{hits}/5 seeds below 1e-10, worst {:.2e}", costs.iter().cloned().fold(0.0, f64::max)))
}

/// Final-generation rows of an experiment's aggregate, keyed by morphology.
fn final_rows(cfg: &ExperimentConfig) -> Vec<AggregateCsvRow> {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(cfg, dir.path(), None).unwrap();
    let rows = read_aggregate(&dir.path().join("aggregate.csv")).unwrap();
    let last = rows.iter().filter_map(|r| r.gen).max();
    rows.into_iter().filter(|r| r.gen == last).collect()
}

fn range(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min)
}

fn means_by(rows: &[AggregateCsvRow], morph: &str) -> Vec<f64> {
    rows.iter().filter(|r| r.morphology == morph).map(|r| r.mean.unwrap_or(f64::NAN)).collect()
}

fn fmt_cells(rows: &[AggregateCsvRow], axis: impl Fn(&AggregateCsvRow) -> f64) -> String {
    rows.iter()
        .map(|r| {
            format!(
                "{}@{}: {:.4e}±{:.2e}",
                r.morphology,
                axis(r),
                r.mean.unwrap_or(f64::NAN),
                r.std.unwrap_or(f64::NAN)
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn data_efficiency(rows: &[AggregateCsvRow]) -> Outcome {
    let (muscle, torque) = (means_by(rows, "muscle"), means_by(rows, "torque"));
    let spread = (range(&muscle), range(&torque));
    let at = |m: &str| rows.iter().find(|r| r.morphology == m && r.c == 0.3).and_then(|r| r.std).unwrap_or(f64::NAN);
    let std = (at("muscle"), at("torque"));
    let a = spread.0 < spread.1;
    let b = std.0 < std.1;
    outcome(
        a && b,
        format!(
            "(a) spread over c muscle {:.4e} vs torque {:.4e}: {}; (b) std at c=0.3 muscle {:.4e} vs torque {:.4e}: {} [{}]",
            spread.0,
            spread.1,
            if a { "ok" } else { "FAIL" },
            std.0,
            std.1,
            if b { "ok" } else { "FAIL" },
            fmt_cells(rows, |r| r.c)
        ),
    )
}

fn sigma_sensitivity(rows: &[AggregateCsvRow]) -> Outcome {
    let (m, t) = (range(&means_by(rows, "muscle")), range(&means_by(rows, "torque")));
    outcome(m < t, format!("range over sigma muscle {m:.4e} vs torque {t:.4e} [{}]", fmt_cells(rows, |r| r.sigma)))
}

fn robustness() -> Outcome {
    let mut cfg = preset("robustness_weights.toml");
    cfg.grid.masses = Some(vec![1.0]);
    let perturbed = expand(&cfg).unwrap();
    let mut specs = perturbed.clone();
    specs.extend(perturbed.iter().map(|s| {
        let mut s = s.clone();
        s.hidden_mass = None;
        s.key.experiment = "unperturbed".into();
        s
    }));
    let results: Vec<(String, bool, f64)> = specs
        .par_iter()
        .map(|s| {
            let run = run_mpc(&cfg, s).unwrap();
            (s.key.morphology.clone(), s.hidden_mass.is_some(), run.summary.final_cost)
        })
        .collect();
    let mut groups: BTreeMap<(String, bool), Vec<f64>> = BTreeMap::new();
    for (m, p, c) in results {
        groups.entry((m, p)).or_default().push(c);
    }
    let stats = |m: &str, p: bool| mean_std(&groups[&(m.to_string(), p)]);
    let (mp, tp) = (stats("muscle", true), stats("torque", true));
    let (mu, tu) = (stats("muscle", false), stats("torque", false));
    let lower = mp.0 < tp.0 && mp.1 < tp.1;
    let worse = mp.0 > mu.0 && tp.0 > tu.0;
    outcome(
        lower && worse,
        format!(
            "1 kg hidden: muscle {:.4e}±{:.2e} vs torque {:.4e}±{:.2e} ({}); unperturbed muscle {:.4e}, torque {:.4e} ({})",
            mp.0,
            mp.1,
            tp.0,
            tp.1,
            if lower { "ok" } else { "FAIL" },
            mu.0,
            tu.0,
            if worse { "ok" } else { "FAIL" }
        ),
    )
}

fn ablation(rows: &[AggregateCsvRow]) -> Outcome {
    let single: Vec<&AggregateCsvRow> = rows.iter().filter(|r| r.morphology != "muscle").collect();
    let worst =
        single.iter().max_by(|a, b| a.mean.unwrap_or(f64::INFINITY).total_cmp(&b.mean.unwrap_or(f64::INFINITY)));
    let name = worst.map(|r| r.morphology.as_str()).unwrap_or("");
    outcome(name == "muscle-nofv", format!("worst single ablation: {name} [{}]", fmt_cells(rows, |r| r.c)))
}

fn reward_formulas() -> Outcome {
    let w = ObjectiveWeights::default();
    let hop = |v: f64| hopping_reward(v, &[], &[0.0], &[(-1.0, 1.0)], false, &w).unwrap();
    let sat = 22025.4658;
    let clamp_ok = [0.1, 0.2, 1.0, 50.0].iter().all(|&v| (hop(v) - sat).abs() < 1e-4);
    let zero_ok = hop(0.0) == 0.0;
    let mut worst: f64 = 0.0;
    let points: [(f64, &[f64]); 10] = [
        (0.0, &[]),
        (1e-3, &[0.1]),
        (0.01, &[0.5, -0.5]),
        (0.05, &[1.0, 1.0]),
        (0.1, &[0.2, 0.4, 0.6, 0.8]),
        (0.25, &[]),
        (0.5, &[-1.0]),
        (1.0, &[]),
        (1.5, &[0.3, 0.3]),
        (2.0, &[1.0, 0.0, -1.0]),
    ];
    for (d, a) in points {
        let effort = if a.is_empty() { 0.0 } else { a.iter().map(|x| x * x).sum::<f64>() / a.len() as f64 };
        let direct = -0.1 * (d - (d + 1e-4f64 * 1e-4).ln()) - 1e-4 * effort - 2.0;
        worst = worst.max((precise_reaching_reward(d, a, &w) - direct).abs());
    }
    outcome(
        clamp_ok && zero_ok && worst <= 1e-12,
        format!("hop(0.1) = {:.4}, hop(0) = {}, precise-reach max deviation {worst:.1e}", hop(0.1), hop(0.0)),
    )
}

fn determinism_and_parity() -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/fixture.toml");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let args = [
            "myoarm".as_ref(),
            "experiment".as_ref(),
            "--config".as_ref(),
            config.as_os_str(),
            "--out".as_ref(),
            d.path().as_os_str(),
        ];
        let code = myoarm::cli::run(args);
        if code != 0 {
            return outcome(false, format!("experiment exited with {code}"));
        }
    }
    let read = |d: &Path| -> BTreeMap<String, Vec<u8>> {
        std::fs::read_dir(d)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
            })
            .collect()
    };
    let (a, b) = (read(dirs[0].path()), read(dirs[1].path()));
    let identical = a == b;
    let rows = read_aggregate(&dirs[0].path().join("aggregate.csv")).unwrap();
    type Cell = (String, Option<usize>);
    let mut per_cell: BTreeMap<Cell, Vec<(String, usize)>> = BTreeMap::new();
    for r in &rows {
        per_cell.entry((r.c.to_string(), r.gen)).or_default().push((r.morphology.clone(), r.evals));
    }
    let parity = per_cell.values().all(|v| v.len() == 3 && v.iter().all(|(_, e)| *e == v[0].1));
    let finals: Vec<String> = per_cell
        .iter()
        .filter(|((_, g), _)| *g == Some(9))
        .map(|((c, _), v)| {
            format!("c={c}: {}", v.iter().map(|(m, e)| format!("{m} {e}")).collect::<Vec<_>>().join(", "))
        })
        .collect();
    outcome(
        identical && parity,
        format!("{} files byte-identical: {identical}; evaluations per side [{}]", a.len(), finals.join("; ")),
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |id: &str, name: &str, limit: Duration, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let in_time = took <= limit;
        let pass = o.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "{} #{id} {name}: {} | runtime {:.1}s (limit {}s){}",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { " exceeded" }
        );
    };
    let minutes = |m: u64| Duration::from_secs(60 * m);
    report("1", "activation dynamics exactness", Duration::from_secs(1), &activation_exactness);
    report("2", "parametrization fidelity", Duration::from_secs(1), &parametrization_fidelity);
    report("3", "dynamics oracle and energy drift", Duration::from_secs(10), &dynamics_oracle);
    report("4", "CMA-ES sphere", Duration::from_secs(30), &cma_sphere);
    report("5", "data efficiency", minutes(30), &|| data_efficiency(&final_rows(&preset("data_efficiency.toml"))));
    report("6", "sigma sensitivity", minutes(30), &|| sigma_sensitivity(&final_rows(&preset("sigma_sweep.toml"))));
    report("7", "robustness under hidden mass", minutes(30), &robustness);
    report("8", "ablation direction", minutes(30), &|| ablation(&final_rows(&preset("ablation.toml"))));
    report("9", "reward formulas", Duration::from_secs(1), &reward_formulas);
    report("10", "determinism and budget parity", minutes(5), &determinism_and_parity);
    println!("{failures} of 10 criteria failed");
    if failures > 0 {
        std::process::exit(1);
    }
}
