//! Binary particle swarm and genetic search over segmentation masks.
//!
//! Both optimizers minimise a [`Fitness`] and break ties toward the lower
//! index. All randomness comes from seeds derived from the run seed and the
//! (generation, individual) coordinates, so evaluating a generation serially
//! or in parallel gives the same result.

mod fitness;
mod ga;
mod pso;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fitness::{evaluate_fitness, validation_len, FitnessContext};
pub use ga::{
    ga_run, ga_step, roulette_probabilities, two_point_crossover, GaConfig, Selection,
};
pub use pso::{inertia_weight, position_update, pso_run, update_velocity, Particle, SwarmConfig};

use crate::strategies::BinaryMask;

/// Objective to minimise. Implemented for every `Fn(&BinaryMask) -> f64`.
pub trait Fitness: Sync {
    fn evaluate(&self, mask: &BinaryMask) -> f64;
}

impl<F: Fn(&BinaryMask) -> f64 + Sync> Fitness for F {
    fn evaluate(&self, mask: &BinaryMask) -> f64 {
        self(mask)
    }
}

/// Counts calls to the wrapped fitness.
pub struct CountingFitness<F> {
    inner: F,
    calls: AtomicUsize,
}

impl<F: Fitness> CountingFitness<F> {
    pub fn new(inner: F) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<F: Fitness> Fitness for CountingFitness<F> {
    fn evaluate(&self, mask: &BinaryMask) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(mask)
    }
}

/// Memoises fitness by mask bits. Only valid for deterministic fitness.
pub struct CachedFitness<F> {
    inner: F,
    memo: Mutex<HashMap<BinaryMask, f64>>,
}

impl<F: Fitness> CachedFitness<F> {
    pub fn new(inner: F) -> Self {
        Self {
            inner,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn distinct(&self) -> usize {
        self.memo.lock().expect("memo poisoned").len()
    }
}

impl<F: Fitness> Fitness for CachedFitness<F> {
    fn evaluate(&self, mask: &BinaryMask) -> f64 {
        if let Some(&v) = self.memo.lock().expect("memo poisoned").get(mask) {
            return v;
        }
        let v = self.inner.evaluate(mask);
        self.memo.lock().expect("memo poisoned").insert(mask.clone(), v);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Best fitness found so far.
    pub best_fitness: f64,
    /// Mean of the finite fitness values of this generation (`+∞` if none).
    pub mean_fitness: f64,
    /// Wall-clock seconds spent on this generation.
    pub seconds: f64,
}

/// One row per generation, starting with the evaluated initial population.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub generations: Vec<GenerationStats>,
}

impl ConvergenceTrace {
    pub fn is_nonincreasing(&self) -> bool {
        self.generations
            .windows(2)
            .all(|w| w[1].best_fitness <= w[0].best_fitness)
    }

    pub fn total_seconds(&self) -> f64 {
        self.generations.iter().map(|g| g.seconds).sum()
    }

    fn push(&mut self, best: f64, fitness: &[f64], started: Instant) {
        let finite: Vec<f64> = fitness.iter().copied().filter(|f| f.is_finite()).collect();
        let mean = if finite.is_empty() {
            f64::INFINITY
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        self.generations.push(GenerationStats {
            generation: self.generations.len(),
            best_fitness: best,
            mean_fitness: mean,
            seconds: started.elapsed().as_secs_f64(),
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerResult {
    pub best: BinaryMask,
    pub best_fitness: f64,
    pub trace: ConvergenceTrace,
    pub evaluations: usize,
}

/// Evaluates every mask, in input order. NaN is treated as `+∞`.
fn evaluate_all<F: Fitness + ?Sized>(fitness: &F, masks: &[BinaryMask], parallel: bool) -> Vec<f64> {
    let clean = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
    if parallel {
        masks.par_iter().map(|m| clean(fitness.evaluate(m))).collect()
    } else {
        masks.iter().map(|m| clean(fitness.evaluate(m))).collect()
    }
}

/// Index of the smallest value, lowest index on ties.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmin_prefers_lower_index() {
        assert_eq!(argmin(&[3.0, 1.0, 1.0]), 1);
        assert_eq!(argmin(&[f64::INFINITY, f64::INFINITY]), 0);
    }

    #[test]
    fn cached_fitness_memoises() {
        let counter = CountingFitness::new(|m: &BinaryMask| m.popcount() as f64);
        let cached = CachedFitness::new(|m: &BinaryMask| counter.evaluate(m));
        let m = BinaryMask::parse("0110").unwrap();
        assert_eq!(cached.evaluate(&m), 2.0);
        assert_eq!(cached.evaluate(&m), 2.0);
        assert_eq!(counter.calls(), 1);
        assert_eq!(cached.distinct(), 1);
    }
}
