use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CmaConfig {
    pub population: usize,
    pub generations: usize,
    pub sigma: f64,
    pub seed: u64,
    /// Defaults to the midpoint of `bounds`, or the origin when unbounded.
    pub initial_mean: Option<Vec<f64>>,
    /// Box applied to every coordinate at evaluation time.
    pub bounds: Option<(f64, f64)>,
}

impl Default for CmaConfig {
    fn default() -> Self {
        Self { population: 36, generations: 100, sigma: 0.2, seed: 0, initial_mean: None, bounds: None }
    }
}

impl CmaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::InvalidParameter(format!("population {} < 4", self.population)));
        }
        if self.generations == 0 {
            return Err(Error::InvalidParameter("generations must be >= 1".into()));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if let Some((lo, hi)) = self.bounds {
            if !(hi > lo) {
                return Err(Error::InvalidParameter(format!("empty bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    /// Best cost seen up to and including this generation.
    pub best_cost: f64,
    pub generation_best: f64,
    /// Cumulative objective evaluations.
    pub evaluations: usize,
    pub sigma: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OptimizationTrace {
    pub generations: Vec<GenerationStats>,
}

impl OptimizationTrace {
    pub fn total_evaluations(&self) -> usize {
        self.generations.last().map_or(0, |g| g.evaluations)
    }

    pub fn is_monotone(&self) -> bool {
        self.generations.windows(2).all(|w| w[1].best_cost <= w[0].best_cost)
    }
}

#[derive(Debug, Clone)]
pub struct CmaResult {
    /// Clamped phenotype of the best sample.
    pub best_x: Vec<f64>,
    pub best_cost: f64,
    pub trace: OptimizationTrace,
}

fn clamp_box(x: &DVector<f64>, bounds: Option<(f64, f64)>) -> Vec<f64> {
    match bounds {
        Some((lo, hi)) => x.iter().map(|v| v.clamp(lo, hi)).collect(),
        None => x.iter().copied().collect(),
    }
}

/// (mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation and
/// rank-one plus rank-mu covariance updates. Runs exactly
/// `population * generations` evaluations; NaN costs rank last.
pub fn cma_es<F>(objective: F, dim: usize, config: &CmaConfig) -> Result<CmaResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    if dim == 0 {
        return Err(Error::InvalidParameter("dim must be >= 1".into()));
    }
    let n = dim as f64;
    let lambda = config.population;
    let mu = lambda / 2;

    let raw: Vec<f64> = (0..mu).map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - ((i + 1) as f64).ln()).collect();
    let wsum: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / wsum).collect();
    let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

    let cc = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n);
    let cs = (mueff + 2.0) / (n + mueff + 5.0);
    let c1 = 2.0 / ((n + 1.3).powi(2) + mueff);
    let cmu = (1.0 - c1).min(2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0).powi(2) + mueff));
    let damps = 1.0 + 2.0 * (((mueff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + cs;
    let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
    // Eigendecomposition is refreshed lazily; C changes slowly relative to this period.
    let eigen_period = ((1.0 / (10.0 * n * (c1 + cmu))).floor() as usize).max(1);

    let mut mean = match &config.initial_mean {
        Some(m) if m.len() != dim => return Err(Error::DimensionMismatch { expected: dim, got: m.len() }),
        Some(m) => DVector::from_column_slice(m),
        None => DVector::from_element(dim, config.bounds.map_or(0.0, |(lo, hi)| 0.5 * (lo + hi))),
    };
    crate::error::ensure_finite(mean.as_slice(), "initial mean")?;

    let mut sigma = config.sigma;
    let mut c = DMatrix::<f64>::identity(dim, dim);
    let mut b = DMatrix::<f64>::identity(dim, dim);
    let mut d = DVector::<f64>::from_element(dim, 1.0);
    let mut pc = DVector::<f64>::zeros(dim);
    let mut ps = DVector::<f64>::zeros(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut best_x = clamp_box(&mean, config.bounds);
    let mut best_cost = f64::INFINITY;
    let mut trace = OptimizationTrace::default();
    let mut evaluations = 0;

    for gen in 0..config.generations {
        let samples: Vec<DVector<f64>> = (0..lambda)
            .map(|_| {
                let z = DVector::<f64>::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
                &mean + sigma * (&b * d.component_mul(&z))
            })
            .collect();
        let phenotypes: Vec<Vec<f64>> = samples.iter().map(|x| clamp_box(x, config.bounds)).collect();
        let costs: Vec<f64> = phenotypes.par_iter().map(|x| objective(x)).collect();
        evaluations += lambda;

        let rank_key = |f: f64| if f.is_nan() { f64::INFINITY } else { f };
        let mut order: Vec<usize> = (0..lambda).collect();
        order.sort_by(|&i, &j| rank_key(costs[i]).total_cmp(&rank_key(costs[j])).then(i.cmp(&j)));

        let gen_best = costs[order[0]];
        if !gen_best.is_nan() && gen_best < best_cost {
            best_cost = gen_best;
            best_x = phenotypes[order[0]].clone();
        }

        let old_mean = mean.clone();
        mean = DVector::zeros(dim);
        for (w, &i) in weights.iter().zip(&order) {
            mean += *w * &samples[i];
        }
        let step = (&mean - &old_mean) / sigma;

        // C^{-1/2} step = B D^{-1} B^T step
        let inv_sqrt_step = &b * (b.transpose() * &step).component_div(&d);
        ps = (1.0 - cs) * &ps + (cs * (2.0 - cs) * mueff).sqrt() * inv_sqrt_step;
        let ps_norm = ps.norm();
        let hsig = ps_norm / (1.0 - (1.0 - cs).powi(2 * (gen as i32 + 1))).sqrt() / chi_n < 1.4 + 2.0 / (n + 1.0);
        let hsig_f = if hsig { 1.0 } else { 0.0 };
        pc = (1.0 - cc) * &pc + hsig_f * (cc * (2.0 - cc) * mueff).sqrt() * &step;

        let mut rank_mu = DMatrix::<f64>::zeros(dim, dim);
        for (w, &i) in weights.iter().zip(&order) {
            let y = (&samples[i] - &old_mean) / sigma;
            rank_mu += *w * &y * y.transpose();
        }
        c = (1.0 - c1 - cmu) * &c + c1 * (&pc * pc.transpose() + (1.0 - hsig_f) * cc * (2.0 - cc) * &c) + cmu * rank_mu;

        sigma *= ((cs / damps) * (ps_norm / chi_n - 1.0)).exp();

        if (gen + 1) % eigen_period == 0 {
            c = 0.5 * (&c + c.transpose());
            let eig = SymmetricEigen::new(c.clone());
            b = eig.eigenvectors;
            d = eig.eigenvalues.map(|v| v.max(f64::MIN_POSITIVE).sqrt());
        }

        trace.generations.push(GenerationStats {
            generation: gen,
            best_cost,
            generation_best: gen_best,
            evaluations,
            sigma,
        });
    }

    Ok(CmaResult { best_x, best_cost, trace })
}
