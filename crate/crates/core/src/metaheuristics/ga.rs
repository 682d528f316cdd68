use alloc::vec::Vec;

use super::operators::{ga_mutate, roulette_select, uniform_crossover};
use super::{argmin, initial_population, Objective, OptimizationResult, OptimizerConfig, OptimizerError, SearchSpace, Tracker};
use crate::seed;

/// Generational GA with roulette-wheel parents, uniform crossover and
/// Gaussian mutation. The best individual survives each generation
/// unchanged, so it is never re-evaluated.
pub fn ga_optimize<O: Objective + ?Sized>(
    space: &SearchSpace,
    objective: &O,
    config: &OptimizerConfig,
) -> Result<OptimizationResult, OptimizerError> {
    config.validate()?;
    let settings = config.ga;
    let mut rng = seed::rng(config.seed);
    let mut tracker = Tracker::new(space, objective);

    let mut population = initial_population(space, config.population_size, &mut rng);
    let mut fitness = tracker.evaluate(&population)?;
    tracker.close_generation();

    for _ in 0..config.generations {
        let elite = argmin(&fitness);
        let mut children = Vec::with_capacity(population.len() - 1);
        for _ in 1..population.len() {
            let (a, b) = roulette_select(&fitness, &mut rng)?;
            let mut child = uniform_crossover(&population[a], &population[b], settings.crossover_prob, &mut rng)?;
            ga_mutate(space, &mut child, settings.mutation_prob, settings.mutation_sigma, &mut rng)?;
            children.push(child);
        }
        let child_fitness = tracker.evaluate(&children)?;

        let mut next = Vec::with_capacity(population.len());
        let mut next_fitness = Vec::with_capacity(population.len());
        next.push(population.swap_remove(elite));
        next_fitness.push(fitness[elite]);
        next.extend(children);
        next_fitness.extend(child_fitness);
        population = next;
        fitness = next_fitness;
        tracker.close_generation();
    }
    tracker.finish(population)
}
