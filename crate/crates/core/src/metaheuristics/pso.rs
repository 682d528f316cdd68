use alloc::vec::Vec;

use super::operators::pso_update;
use super::{argmin, initial_population, Objective, OptimizationResult, OptimizerConfig, OptimizerError, SearchSpace, Tracker};
use crate::seed;

/// Global-best PSO. Velocities start uniform in `±|upper - lower|`; the
/// global best is refreshed after every swarm-wide evaluation.
pub fn pso_optimize<O: Objective + ?Sized>(
    space: &SearchSpace,
    objective: &O,
    config: &OptimizerConfig,
) -> Result<OptimizationResult, OptimizerError> {
    config.validate()?;
    let mut rng = seed::rng(config.seed);
    let mut tracker = Tracker::new(space, objective);

    let mut positions = initial_population(space, config.population_size, &mut rng);
    let mut velocities: Vec<Vec<f64>> = (0..config.population_size)
        .map(|_| {
            space
                .params()
                .iter()
                .map(|p| {
                    let (lo, hi) = p.internal_bounds();
                    let span = (hi - lo).abs();
                    -span + 2.0 * span * rand::Rng::random::<f64>(&mut rng)
                })
                .collect()
        })
        .collect();
    let fitness = tracker.evaluate(&positions)?;
    tracker.close_generation();

    let mut personal_best = positions.clone();
    let mut personal_fitness = fitness;
    let mut global = argmin(&personal_fitness);
    let mut global_best = personal_best[global].clone();

    for _ in 0..config.generations {
        for i in 0..positions.len() {
            pso_update(
                space,
                &mut positions[i],
                &mut velocities[i],
                &personal_best[i],
                &global_best,
                config.pso,
                &mut rng,
            )?;
        }
        let fitness = tracker.evaluate(&positions)?;
        for (i, f) in fitness.into_iter().enumerate() {
            if f < personal_fitness[i] {
                personal_fitness[i] = f;
                personal_best[i] = positions[i].clone();
            }
        }
        global = argmin(&personal_fitness);
        global_best = personal_best[global].clone();
        tracker.close_generation();
    }
    tracker.finish(positions)
}
