//! Variation and selection operators shared by the three optimizers.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{OptimizerError, SearchSpace};

fn same_dim(a: &[f64], b: &[f64]) -> Result<(), OptimizerError> {
    if a.len() != b.len() {
        return Err(OptimizerError::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(())
}

/// Selection probabilities for a minimization problem: weight of `i` is
/// `f_max - f_i + eps` with `eps = 1e-12 * (1 + |f_max|)`. Non-finite
/// fitnesses get zero weight; if nothing is finite the wheel is uniform.
pub fn roulette_weights(fitness: &[f64]) -> Result<Vec<f64>, OptimizerError> {
    if fitness.is_empty() {
        return Err(OptimizerError::EmptyPopulation);
    }
    let worst = fitness.iter().copied().filter(|f| f.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if worst == f64::NEG_INFINITY {
        return Ok(vec![1.0 / fitness.len() as f64; fitness.len()]);
    }
    let eps = 1e-12 * (1.0 + worst.abs());
    let raw: Vec<f64> = fitness
        .iter()
        .map(|&f| if f.is_finite() { worst - f + eps } else { 0.0 })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

fn spin<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let total = *cumulative.last().expect("non-empty wheel");
    let u = rng.random::<f64>() * total;
    cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
}

/// Draws two parents by roulette wheel. An identical second draw is
/// repeated once; after that a repeat is accepted.
pub fn roulette_select<R: Rng + ?Sized>(fitness: &[f64], rng: &mut R) -> Result<(usize, usize), OptimizerError> {
    let weights = roulette_weights(fitness)?;
    let mut acc = 0.0;
    let cumulative: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    let first = spin(&cumulative, rng);
    let mut second = spin(&cumulative, rng);
    if second == first {
        second = spin(&cumulative, rng);
    }
    Ok((first, second))
}

/// With probability `crossover_prob`, takes each gene from either parent
/// with equal chance; otherwise returns a copy of `p1`.
pub fn uniform_crossover<R: Rng + ?Sized>(
    p1: &[f64],
    p2: &[f64],
    crossover_prob: f64,
    rng: &mut R,
) -> Result<Vec<f64>, OptimizerError> {
    same_dim(p1, p2)?;
    if rng.random::<f64>() >= crossover_prob {
        return Ok(p1.to_vec());
    }
    Ok(p1.iter().zip(p2).map(|(&a, &b)| if rng.random_bool(0.5) { a } else { b }).collect())
}

/// Gaussian perturbation of each gene with probability `mutation_prob`.
/// The noise scale is `mutation_sigma` times the gene's internal range.
pub fn ga_mutate<R: Rng + ?Sized>(
    space: &SearchSpace,
    position: &mut [f64],
    mutation_prob: f64,
    mutation_sigma: f64,
    rng: &mut R,
) -> Result<(), OptimizerError> {
    space.check_dim(position)?;
    for (p, x) in space.params().iter().zip(position.iter_mut()) {
        if rng.random::<f64>() < mutation_prob {
            let (lo, hi) = p.internal_bounds();
            let z: f64 = StandardNormal.sample(rng);
            *x += z * mutation_sigma * (hi - lo);
        }
    }
    space.clamp(position);
    Ok(())
}

/// `v = x_r1 + f * (x_r2 - x_r3)`, clamped into the search box.
pub fn de_mutate(
    space: &SearchSpace,
    x_r1: &[f64],
    x_r2: &[f64],
    x_r3: &[f64],
    f: f64,
) -> Result<Vec<f64>, OptimizerError> {
    space.check_dim(x_r1)?;
    same_dim(x_r1, x_r2)?;
    same_dim(x_r1, x_r3)?;
    let mut v: Vec<f64> = x_r1.iter().zip(x_r2).zip(x_r3).map(|((a, b), c)| a + f * (b - c)).collect();
    space.clamp(&mut v);
    Ok(v)
}

/// Binomial crossover: gene `j` comes from the mutant when a uniform draw
/// on `(0, 1]` is at most `cr`. With `force_jrand`, one random gene is
/// taken from the mutant regardless.
pub fn de_crossover<R: Rng + ?Sized>(
    target: &[f64],
    mutant: &[f64],
    cr: f64,
    force_jrand: bool,
    rng: &mut R,
) -> Result<Vec<f64>, OptimizerError> {
    same_dim(target, mutant)?;
    let mut trial: Vec<f64> = target
        .iter()
        .zip(mutant)
        .map(|(&x, &v)| if 1.0 - rng.random::<f64>() <= cr { v } else { x })
        .collect();
    if force_jrand && !trial.is_empty() {
        let j = rng.random_range(0..trial.len());
        trial[j] = mutant[j];
    }
    Ok(trial)
}

/// Inertia, cognitive and social coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoCoefficients {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for PsoCoefficients {
    fn default() -> Self {
        Self { inertia: 0.729, cognitive: 1.494_45, social: 1.494_45 }
    }
}

/// Velocity then position update. Coordinates pushed outside the box are
/// clamped and their velocity set to zero.
pub fn pso_update<R: Rng + ?Sized>(
    space: &SearchSpace,
    position: &mut [f64],
    velocity: &mut [f64],
    personal_best: &[f64],
    global_best: &[f64],
    coeffs: PsoCoefficients,
    rng: &mut R,
) -> Result<(), OptimizerError> {
    space.check_dim(position)?;
    same_dim(position, velocity)?;
    same_dim(position, personal_best)?;
    same_dim(position, global_best)?;
    for j in 0..position.len() {
        let r1 = rng.random::<f64>();
        let r2 = rng.random::<f64>();
        velocity[j] = coeffs.inertia * velocity[j]
            + coeffs.cognitive * r1 * (personal_best[j] - position[j])
            + coeffs.social * r2 * (global_best[j] - position[j]);
        position[j] += velocity[j];
    }
    for (moved, v) in space.clamp(position).into_iter().zip(velocity.iter_mut()) {
        if moved {
            *v = 0.0;
        }
    }
    Ok(())
}
