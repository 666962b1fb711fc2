use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmin, evaluate_all, ConvergenceTrace, Fitness, OptimizerResult};
use crate::error::{Error, Result};
use crate::scalar::sigmoid;
use crate::seed::rng_from;
use crate::seed_of;
use crate::strategies::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub c1: f64,
    pub c2: f64,
    pub w_max: f64,
    pub w_min: f64,
    pub v_max: f64,
    pub seed: u64,
    /// Evaluate each generation on the rayon pool.
    pub parallel: bool,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            swarm_size: 20,
            iterations: 100,
            c1: 2.0,
            c2: 2.0,
            w_max: 0.9,
            w_min: 0.4,
            v_max: 4.0,
            seed: 0,
            parallel: false,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::Config(format!("swarm size {} < 2", self.swarm_size)));
        }
        if self.iterations < 1 {
            return Err(Error::Config("swarm iterations must be at least 1".into()));
        }
        if !(self.w_max >= self.w_min) {
            return Err(Error::Config("w_max must be >= w_min".into()));
        }
        if !(self.v_max > 0.0) {
            return Err(Error::Config("v_max must be positive".into()));
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0) {
            return Err(Error::Config("acceleration constants must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: BinaryMask,
    pub velocity: Vec<f64>,
    pub pbest: BinaryMask,
    pub pbest_fitness: f64,
}

/// Linearly decreasing inertia: `w_max` at `t = 0`, `w_min` at `t = T`.
pub fn inertia_weight(t: usize, total: usize, w_max: f64, w_min: f64) -> Result<f64> {
    if t > total || total == 0 {
        return Err(Error::invalid(format!("generation {t} outside 0..={total}")));
    }
    Ok((w_max - w_min) * (total - t) as f64 / total as f64 + w_min)
}

fn bit(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// `w·v + c1·r1·(pbest − p) + c2·r2·(gbest − p)` per dimension with fresh
/// uniforms, clamped to `[−v_max, v_max]`.
pub fn update_velocity<R: Rng>(
    particle: &Particle,
    gbest: &BinaryMask,
    w: f64,
    c1: f64,
    c2: f64,
    v_max: f64,
    rng: &mut R,
) -> Vec<f64> {
    particle
        .velocity
        .iter()
        .zip(particle.position.bits())
        .zip(particle.pbest.bits().iter().zip(gbest.bits()))
        .map(|((&v, &p), (&pb, &gb))| {
            let r1: f64 = rng.gen();
            let r2: f64 = rng.gen();
            let p = bit(p);
            let raw = w * v + c1 * r1 * (bit(pb) - p) + c2 * r2 * (bit(gb) - p);
            raw.clamp(-v_max, v_max)
        })
        .collect()
}

/// Bit `d` is set iff a fresh uniform falls below `sigmoid(v_d)`.
pub fn position_update<R: Rng>(velocity: &[f64], rng: &mut R) -> BinaryMask {
    BinaryMask::new(
        velocity
            .iter()
            .map(|&v| rng.gen::<f64>() < sigmoid(v))
            .collect(),
    )
}

/// Binary PSO. The initial swarm (Bernoulli(0.5) bits, zero velocity) is
/// evaluated as generation 0, followed by `iterations` move-and-evaluate
/// generations, so the fitness is called `swarm_size · (iterations + 1)`
/// times. Personal and global bests change only on strict improvement.
pub fn pso_run<F: Fitness + ?Sized>(
    fitness: &F,
    dimension: usize,
    cfg: &SwarmConfig,
) -> Result<OptimizerResult> {
    cfg.validate()?;
    let started = Instant::now();
    let mut swarm: Vec<Particle> = (0..cfg.swarm_size)
        .map(|i| {
            let mut rng = rng_from(seed_of!(cfg.seed, "pso-init", i));
            let position = BinaryMask::new((0..dimension).map(|_| rng.gen_bool(0.5)).collect());
            Particle {
                pbest: position.clone(),
                position,
                velocity: vec![0.0; dimension],
                pbest_fitness: f64::INFINITY,
            }
        })
        .collect();
    let positions: Vec<BinaryMask> = swarm.iter().map(|p| p.position.clone()).collect();
    let values = evaluate_all(fitness, &positions, cfg.parallel);
    for (p, &f) in swarm.iter_mut().zip(&values) {
        p.pbest_fitness = f;
    }
    let g = argmin(&values);
    let mut gbest = swarm[g].pbest.clone();
    let mut gbest_fitness = values[g];
    let mut evaluations = values.len();
    let mut trace = ConvergenceTrace::default();
    trace.push(gbest_fitness, &values, started);

    for t in 1..=cfg.iterations {
        let gen_start = Instant::now();
        let w = inertia_weight(t, cfg.iterations, cfg.w_max, cfg.w_min)?;
        for (i, p) in swarm.iter_mut().enumerate() {
            let mut rng = rng_from(seed_of!(cfg.seed, "pso", t, i));
            p.velocity = update_velocity(p, &gbest, w, cfg.c1, cfg.c2, cfg.v_max, &mut rng);
            p.position = position_update(&p.velocity, &mut rng);
        }
        let positions: Vec<BinaryMask> = swarm.iter().map(|p| p.position.clone()).collect();
        let values = evaluate_all(fitness, &positions, cfg.parallel);
        evaluations += values.len();
        for (p, &f) in swarm.iter_mut().zip(&values) {
            if f < p.pbest_fitness {
                p.pbest_fitness = f;
                p.pbest = p.position.clone();
            }
        }
        for p in &swarm {
            if p.pbest_fitness < gbest_fitness {
                gbest_fitness = p.pbest_fitness;
                gbest = p.pbest.clone();
            }
        }
        trace.push(gbest_fitness, &values, gen_start);
    }
    Ok(OptimizerResult {
        best: gbest,
        best_fitness: gbest_fitness,
        trace,
        evaluations,
    })
}
