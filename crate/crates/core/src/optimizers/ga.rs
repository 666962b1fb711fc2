use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmin, evaluate_all, ConvergenceTrace, Fitness, OptimizerResult};
use crate::error::{Error, Result};
use crate::seed::rng_from;
use crate::seed_of;
use crate::strategies::BinaryMask;

/// Offset added to transformed roulette weights so the worst individual
/// keeps a nonzero share.
const ROULETTE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Roulette,
    /// Keep the best `fraction` of the population.
    TopPercent(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub iterations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub selection: Selection,
    /// Share of the population kept as parents under roulette selection.
    pub roulette_keep: f64,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 20,
            iterations: 100,
            crossover_prob: 0.9,
            mutation_prob: 0.02,
            selection: Selection::Roulette,
            roulette_keep: 0.5,
            seed: 0,
            parallel: false,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if self.population < 2 {
            return Err(Error::Config(format!("population {} < 2", self.population)));
        }
        if self.iterations < 1 {
            return Err(Error::Config("GA iterations must be at least 1".into()));
        }
        if !unit(self.crossover_prob) || !unit(self.mutation_prob) {
            return Err(Error::Config("GA probabilities must lie in [0, 1]".into()));
        }
        let keep = match self.selection {
            Selection::Roulette => self.roulette_keep,
            Selection::TopPercent(f) => f,
        };
        if !(keep > 0.0 && keep <= 1.0) {
            return Err(Error::Config(format!("selection fraction {keep} outside (0, 1]")));
        }
        Ok(())
    }

    /// Number of parents kept each generation.
    pub fn survivors(&self) -> usize {
        let keep = match self.selection {
            Selection::Roulette => self.roulette_keep,
            Selection::TopPercent(f) => f,
        };
        ((keep * self.population as f64).ceil() as usize).clamp(1, self.population)
    }
}

/// Selection probabilities for minimisation: weights `(max − f) + ε` over
/// finite fitness values, zero for infinite ones, normalised to sum to 1.
/// Uniform when no value is finite.
pub fn roulette_probabilities(fitness: &[f64]) -> Vec<f64> {
    let max = fitness
        .iter()
        .copied()
        .filter(|f| f.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return vec![1.0 / fitness.len() as f64; fitness.len()];
    }
    let weights: Vec<f64> = fitness
        .iter()
        .map(|&f| if f.is_finite() { (max - f) + ROULETTE_EPS } else { 0.0 })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

fn spin<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if r < acc {
            return i;
        }
    }
    // Rounding left `r` past the last cumulative sum: take the last
    // individual with nonzero probability.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Exchanges the bits in `[c1, c2)` between two parents.
pub fn two_point_crossover(
    a: &BinaryMask,
    b: &BinaryMask,
    c1: usize,
    c2: usize,
) -> (BinaryMask, BinaryMask) {
    let mut x = a.clone();
    let mut y = b.clone();
    for i in c1..c2.min(a.len()) {
        x.bits_mut()[i] = b.bits()[i];
        y.bits_mut()[i] = a.bits()[i];
    }
    (x, y)
}

/// Indices of the parents kept for breeding; the generation best comes
/// first.
fn select<R: Rng>(fitness: &[f64], cfg: &GaConfig, rng: &mut R) -> Vec<usize> {
    let k = cfg.survivors();
    let best = argmin(fitness);
    match cfg.selection {
        Selection::TopPercent(_) => {
            let mut order: Vec<usize> = (0..fitness.len()).collect();
            order.sort_by(|&i, &j| fitness[i].total_cmp(&fitness[j]).then(i.cmp(&j)));
            order.truncate(k);
            order
        }
        Selection::Roulette => {
            let probs = roulette_probabilities(fitness);
            let mut chosen = vec![best];
            chosen.extend((1..k).map(|_| spin(&probs, rng)));
            chosen
        }
    }
}

/// One generation of selection, crossover and mutation. Returns the next
/// population; its first member is the current best, copied unmutated.
pub fn ga_step<R: Rng>(
    population: &[BinaryMask],
    fitness: &[f64],
    cfg: &GaConfig,
    rng: &mut R,
) -> Vec<BinaryMask> {
    let parents: Vec<BinaryMask> = select(fitness, cfg, rng)
        .into_iter()
        .map(|i| population[i].clone())
        .collect();
    let dim = population[0].len();
    let mut next = parents.clone();
    while next.len() < population.len() {
        let a = &parents[rng.gen_range(0..parents.len())];
        let b = &parents[rng.gen_range(0..parents.len())];
        let (x, y) = if dim > 0 && rng.gen::<f64>() < cfg.crossover_prob {
            let mut c1 = rng.gen_range(0..=dim);
            let mut c2 = rng.gen_range(0..=dim);
            if c1 > c2 {
                std::mem::swap(&mut c1, &mut c2);
            }
            two_point_crossover(a, b, c1, c2)
        } else {
            (a.clone(), b.clone())
        };
        next.push(x);
        if next.len() < population.len() {
            next.push(y);
        }
    }
    for m in next.iter_mut().skip(1) {
        for b in m.bits_mut() {
            if rng.gen::<f64>() < cfg.mutation_prob {
                *b = !*b;
            }
        }
    }
    next
}

/// Binary GA with elitism of one. The initial population is generation 0;
/// each of the `iterations` further generations is bred and evaluated, so
/// the fitness is called `population · (iterations + 1)` times. Returns the
/// best mask ever evaluated.
pub fn ga_run<F: Fitness + ?Sized>(
    fitness: &F,
    dimension: usize,
    cfg: &GaConfig,
) -> Result<OptimizerResult> {
    cfg.validate()?;
    let started = Instant::now();
    let mut population: Vec<BinaryMask> = (0..cfg.population)
        .map(|i| {
            let mut rng = rng_from(seed_of!(cfg.seed, "ga-init", i));
            BinaryMask::new((0..dimension).map(|_| rng.gen_bool(0.5)).collect())
        })
        .collect();
    let mut values = evaluate_all(fitness, &population, cfg.parallel);
    let g = argmin(&values);
    let mut best = population[g].clone();
    let mut best_fitness = values[g];
    let mut evaluations = values.len();
    let mut trace = ConvergenceTrace::default();
    trace.push(best_fitness, &values, started);

    for t in 1..=cfg.iterations {
        let gen_start = Instant::now();
        let mut rng = rng_from(seed_of!(cfg.seed, "ga", t));
        population = ga_step(&population, &values, cfg, &mut rng);
        values = evaluate_all(fitness, &population, cfg.parallel);
        evaluations += values.len();
        let g = argmin(&values);
        if values[g] < best_fitness {
            best_fitness = values[g];
            best = population[g].clone();
        }
        trace.push(best_fitness, &values, gen_start);
    }
    Ok(OptimizerResult {
        best,
        best_fitness,
        trace,
        evaluations,
    })
}
