//! Genetic algorithm, differential evolution and particle swarm search over
//! a bounded mixed integer/continuous box.
//!
//! All three minimize a black-box [`Objective`]. Candidates live in internal
//! coordinates (log-mapped where a parameter asks for it) and are decoded to
//! an [`Assignment`] before each evaluation. A whole generation is handed to
//! [`Objective::evaluate_batch`] at once so callers can fan the work out;
//! the optimizer state itself never leaves the calling thread.

mod de;
mod ga;
pub mod operators;
mod pso;
mod space;

use alloc::vec::Vec;

pub use de::de_optimize;
pub use ga::ga_optimize;
pub use operators::PsoCoefficients;
pub use pso::pso_optimize;
pub use space::{Assignment, ParamKind, ParamSpec, ParamValue, SearchSpace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizerError {
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("population is empty")]
    EmptyPopulation,
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid bounds for parameter `{0}`")]
    InvalidParam(alloc::string::String),
    #[error("parameter `{0}` appears twice")]
    DuplicateParam(alloc::string::String),
}

/// A fitness function to minimize. Non-finite values mark a failed
/// evaluation and are recorded as `+inf`.
pub trait Objective {
    fn evaluate(&self, params: &Assignment) -> f64;

    /// Evaluates a generation. Results must come back in input order.
    fn evaluate_batch(&self, batch: &[Assignment]) -> Vec<f64> {
        batch.iter().map(|a| self.evaluate(a)).collect()
    }
}

impl<F> Objective for F
where
    F: Fn(&Assignment) -> f64,
{
    fn evaluate(&self, params: &Assignment) -> f64 {
        self(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaSettings {
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Fraction of each gene's internal range used as the mutation std.
    pub mutation_sigma: f64,
}

impl Default for GaSettings {
    fn default() -> Self {
        Self { crossover_prob: 0.9, mutation_prob: 0.3, mutation_sigma: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeSettings {
    pub scale: f64,
    pub crossover: f64,
    pub force_jrand: bool,
}

impl Default for DeSettings {
    fn default() -> Self {
        Self { scale: 0.8, crossover: 0.9, force_jrand: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub population_size: usize,
    pub generations: usize,
    pub seed: u64,
    pub ga: GaSettings,
    pub de: DeSettings,
    pub pso: PsoCoefficients,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            population_size: 10,
            generations: 10,
            seed: 0,
            ga: GaSettings::default(),
            de: DeSettings::default(),
            pso: PsoCoefficients::default(),
        }
    }
}

impl OptimizerConfig {
    pub const MIN_POPULATION: usize = 5;
    pub const MAX_POPULATION: usize = 10;

    pub fn validate(&self) -> Result<(), OptimizerError> {
        if !(Self::MIN_POPULATION..=Self::MAX_POPULATION).contains(&self.population_size) {
            return Err(OptimizerError::InvalidConfig("population size must lie in [5, 10]"));
        }
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !unit(self.ga.crossover_prob) || !unit(self.ga.mutation_prob) || !unit(self.de.crossover) {
            return Err(OptimizerError::InvalidConfig("probabilities must lie in [0, 1]"));
        }
        if !(self.ga.mutation_sigma >= 0.0) || !self.de.scale.is_finite() {
            return Err(OptimizerError::InvalidConfig("mutation scale must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Genetic,
    DifferentialEvolution,
    ParticleSwarm,
}

impl Algorithm {
    pub fn optimize<O: Objective + ?Sized>(
        self,
        space: &SearchSpace,
        objective: &O,
        config: &OptimizerConfig,
    ) -> Result<OptimizationResult, OptimizerError> {
        match self {
            Algorithm::Genetic => ga_optimize(space, objective, config),
            Algorithm::DifferentialEvolution => de_optimize(space, objective, config),
            Algorithm::ParticleSwarm => pso_optimize(space, objective, config),
        }
    }
}

/// One fitness evaluation as seen by the optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub position: Vec<f64>,
    pub params: Assignment,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best: Assignment,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best-so-far fitness after initialization and after each generation.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub failed_evaluations: usize,
    pub history: Vec<Evaluation>,
    pub final_population: Vec<Vec<f64>>,
}

/// Evaluation bookkeeping shared by the optimizers.
pub(crate) struct Tracker<'a, O: Objective + ?Sized> {
    space: &'a SearchSpace,
    objective: &'a O,
    best_position: Vec<f64>,
    best_fitness: f64,
    failed: usize,
    history: Vec<Evaluation>,
    trace: Vec<f64>,
}

impl<'a, O: Objective + ?Sized> Tracker<'a, O> {
    pub(crate) fn new(space: &'a SearchSpace, objective: &'a O) -> Self {
        Self {
            space,
            objective,
            best_position: Vec::new(),
            best_fitness: f64::INFINITY,
            failed: 0,
            history: Vec::new(),
            trace: Vec::new(),
        }
    }

    pub(crate) fn evaluate(&mut self, positions: &[Vec<f64>]) -> Result<Vec<f64>, OptimizerError> {
        let params =
            positions.iter().map(|p| self.space.decode(p)).collect::<Result<Vec<_>, _>>()?;
        let raw = self.objective.evaluate_batch(&params);
        debug_assert_eq!(raw.len(), params.len());
        let mut out = Vec::with_capacity(raw.len());
        for ((position, params), f) in positions.iter().zip(params).zip(raw) {
            let fitness = if f.is_finite() {
                f
            } else {
                self.failed += 1;
                f64::INFINITY
            };
            if fitness < self.best_fitness || self.best_position.is_empty() {
                self.best_fitness = fitness;
                self.best_position = position.clone();
            }
            self.history.push(Evaluation { position: position.clone(), params, fitness });
            out.push(fitness);
        }
        Ok(out)
    }

    pub(crate) fn close_generation(&mut self) {
        self.trace.push(self.best_fitness);
    }

    pub(crate) fn finish(self, final_population: Vec<Vec<f64>>) -> Result<OptimizationResult, OptimizerError> {
        Ok(OptimizationResult {
            best: self.space.decode(&self.best_position)?,
            best_position: self.best_position,
            best_fitness: self.best_fitness,
            trace: self.trace,
            evaluations: self.history.len(),
            failed_evaluations: self.failed,
            history: self.history,
            final_population,
        })
    }
}

pub(crate) fn initial_population<R: rand::Rng + ?Sized>(
    space: &SearchSpace,
    size: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    (0..size).map(|_| space.sample(rng)).collect()
}

pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}
