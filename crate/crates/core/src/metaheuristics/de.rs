use alloc::vec::Vec;
use rand::Rng;

use super::operators::{de_crossover, de_mutate};
use super::{initial_population, Objective, OptimizationResult, OptimizerConfig, OptimizerError, SearchSpace, Tracker};
use crate::seed;

/// DE/rand/1/bin with greedy one-to-one replacement. Trials for the whole
/// generation are built from the current population and evaluated together
/// before any replacement happens.
pub fn de_optimize<O: Objective + ?Sized>(
    space: &SearchSpace,
    objective: &O,
    config: &OptimizerConfig,
) -> Result<OptimizationResult, OptimizerError> {
    config.validate()?;
    let settings = config.de;
    let n = config.population_size;
    let mut rng = seed::rng(config.seed);
    let mut tracker = Tracker::new(space, objective);

    let mut population = initial_population(space, n, &mut rng);
    let mut fitness = tracker.evaluate(&population)?;
    tracker.close_generation();

    for _ in 0..config.generations {
        let mut trials = Vec::with_capacity(n);
        for i in 0..n {
            let [r1, r2, r3] = donors(i, n, &mut rng);
            let mutant = de_mutate(space, &population[r1], &population[r2], &population[r3], settings.scale)?;
            trials.push(de_crossover(&population[i], &mutant, settings.crossover, settings.force_jrand, &mut rng)?);
        }
        let trial_fitness = tracker.evaluate(&trials)?;
        for (i, (trial, f)) in trials.into_iter().zip(trial_fitness).enumerate() {
            if f < fitness[i] {
                population[i] = trial;
                fitness[i] = f;
            }
        }
        tracker.close_generation();
    }
    tracker.finish(population)
}

/// Three indices distinct from each other and from `target`.
fn donors<R: Rng + ?Sized>(target: usize, n: usize, rng: &mut R) -> [usize; 3] {
    let mut picked = [usize::MAX; 3];
    let mut k = 0;
    while k < 3 {
        let c = rng.random_range(0..n);
        if c != target && !picked[..k].contains(&c) {
            picked[k] = c;
            k += 1;
        }
    }
    picked
}
