//! Real-coded generational GA used as the optimization testbed.
//!
//! Operators: tournament selection without replacement, arithmetic
//! crossover, per-gene Gaussian mutation scaled by the axis width, and
//! elitism. Genes leaving the domain are clamped back onto it. All
//! parameters can be re-assigned between generations through a
//! [`Strategy`].

use std::cmp::Ordering;
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::ObjectiveFunction;

pub type GaRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> GaRng {
    GaRng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: Vec<f64>,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub members: Vec<Individual>,
    pub generation: usize,
}

impl Population {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn best(&self) -> Option<&Individual> {
        self.members
            .iter()
            .min_by(|a, b| a.fitness.total_cmp(&b.fitness))
    }

    pub fn best_fitness(&self) -> f64 {
        self.best().map_or(f64::INFINITY, |b| b.fitness)
    }

    /// Member indices ordered fittest first; ties keep index order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.members.len()).collect();
        order.sort_by(|&a, &b| {
            self.members[a]
                .fitness
                .total_cmp(&self.members[b].fitness)
                .then(a.cmp(&b))
        });
        order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub population_size: usize,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Probability that a child is produced by crossover instead of cloning.
    pub crossover_rate: f64,
    pub tournament_size: usize,
    /// Mutation standard deviation as a fraction of each axis width.
    pub mutation_sigma_fraction: f64,
    pub elite_count: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population_size: 60,
            mutation_rate: 0.01,
            crossover_rate: 0.9,
            tournament_size: 2,
            mutation_sigma_fraction: 0.004,
            elite_count: 1,
        }
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} = {p} is not in [0, 1]")))
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidParams(format!(
                "population_size = {} must be at least 2",
                self.population_size
            )));
        }
        check_probability("mutation_rate", self.mutation_rate)?;
        check_probability("crossover_rate", self.crossover_rate)?;
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return Err(Error::InvalidParams(format!(
                "tournament_size = {} must be in [1, population_size = {}]",
                self.tournament_size, self.population_size
            )));
        }
        if !(self.mutation_sigma_fraction.is_finite() && self.mutation_sigma_fraction >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "mutation_sigma_fraction = {} must be finite and non-negative",
                self.mutation_sigma_fraction
            )));
        }
        if self.elite_count >= self.population_size {
            return Err(Error::InvalidParams(format!(
                "elite_count = {} must be below population_size = {}",
                self.elite_count, self.population_size
            )));
        }
        Ok(())
    }
}

/// Partial parameter assignment; `None` leaves the current value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossover_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tournament_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_sigma_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elite_count: Option<usize>,
}

impl ParamOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    /// Checks the fields that can be judged without the parameters they
    /// will be applied to.
    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.population_size {
            if n < 2 {
                return Err(Error::InvalidParams(format!(
                    "population_size = {n} must be at least 2"
                )));
            }
        }
        if let Some(p) = self.mutation_rate {
            check_probability("mutation_rate", p)?;
        }
        if let Some(p) = self.crossover_rate {
            check_probability("crossover_rate", p)?;
        }
        if self.tournament_size == Some(0) {
            return Err(Error::InvalidParams("tournament_size must be positive".into()));
        }
        if let Some(s) = self.mutation_sigma_fraction {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "mutation_sigma_fraction = {s} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }

    pub fn apply(&self, current: &GaParams) -> Result<GaParams> {
        self.validate()?;
        let next = GaParams {
            population_size: self.population_size.unwrap_or(current.population_size),
            mutation_rate: self.mutation_rate.unwrap_or(current.mutation_rate),
            crossover_rate: self.crossover_rate.unwrap_or(current.crossover_rate),
            tournament_size: self.tournament_size.unwrap_or(current.tournament_size),
            mutation_sigma_fraction: self
                .mutation_sigma_fraction
                .unwrap_or(current.mutation_sigma_fraction),
            elite_count: self.elite_count.unwrap_or(current.elite_count),
        };
        next.validate()?;
        Ok(next)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyStep {
    pub trigger_generation: usize,
    pub assignments: ParamOverrides,
}

/// Schedule of parameter re-assignments. A step fires once the population
/// has reached `trigger_generation`, before the next generation is bred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub id: String,
    pub steps: Vec<StrategyStep>,
}

impl Strategy {
    /// A strategy that changes nothing.
    pub fn identity(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            steps: Vec::new(),
        }
    }

    pub fn single(id: impl Into<String>, trigger_generation: usize, assignments: ParamOverrides) -> Self {
        Self {
            id: id.into(),
            steps: vec![StrategyStep {
                trigger_generation,
                assignments,
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for pair in self.steps.windows(2) {
            if pair[1].trigger_generation <= pair[0].trigger_generation {
                return Err(Error::InvalidStrategy(format!(
                    "strategy `{}`: triggers must be strictly increasing ({} then {})",
                    self.id, pair[0].trigger_generation, pair[1].trigger_generation
                )));
            }
        }
        for step in &self.steps {
            step.assignments.validate().map_err(|e| {
                Error::InvalidStrategy(format!("strategy `{}`: {e}", self.id))
            })?;
        }
        Ok(())
    }

    /// Shifts every trigger by `offset` generations.
    pub fn rebased(&self, offset: usize) -> Self {
        Self {
            id: self.id.clone(),
            steps: self
                .steps
                .iter()
                .map(|s| StrategyStep {
                    trigger_generation: s.trigger_generation + offset,
                    assignments: s.assignments,
                })
                .collect(),
        }
    }

    pub fn step_at(&self, generation: usize) -> Option<&StrategyStep> {
        self.steps
            .iter()
            .find(|s| s.trigger_generation == generation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunBudget {
    pub max_generations: usize,
    pub max_evaluations: u64,
    pub termination_error: f64,
}

impl RunBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_evaluations == 0 {
            return Err(Error::InvalidConfig("max_evaluations must be positive".into()));
        }
        if !(self.termination_error.is_finite() && self.termination_error > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "termination_error = {} must be positive",
                self.termination_error
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub function: String,
    pub seed: u64,
    pub strategy_id: String,
    pub evaluations: u64,
    pub generations: usize,
    pub best_fitness: f64,
    pub converged: bool,
    pub wall_ms: f64,
}

fn mutate(genome: &mut [f64], function: &ObjectiveFunction, params: &GaParams, rng: &mut GaRng) {
    for (axis, gene) in genome.iter_mut().enumerate() {
        if rng.random::<f64>() < params.mutation_rate {
            let z: f64 = rng.sample(StandardNormal);
            *gene += z * params.mutation_sigma_fraction * function.domain.width(axis);
        }
    }
    function.domain.clamp(genome);
}

fn tournament<'p>(pop: &'p Population, size: usize, rng: &mut GaRng) -> &'p Individual {
    let picks = index::sample(rng, pop.len(), size);
    let mut best = &pop.members[picks.index(0)];
    for i in picks.iter().skip(1) {
        let candidate = &pop.members[i];
        if candidate.fitness.total_cmp(&best.fitness) == Ordering::Less {
            best = candidate;
        }
    }
    best
}

/// Samples `params.population_size` genomes uniformly in the domain.
pub fn init_population(
    function: &ObjectiveFunction,
    params: &GaParams,
    rng: &mut GaRng,
) -> Result<Population> {
    params.validate()?;
    let domain = &function.domain;
    let members = (0..params.population_size)
        .map(|_| {
            let genome: Vec<f64> = (0..domain.dimension())
                .map(|axis| rng.random_range(domain.lower()[axis]..=domain.upper()[axis]))
                .collect();
            let fitness = function.evaluate_unchecked(&genome);
            Individual { genome, fitness }
        })
        .collect();
    Ok(Population {
        members,
        generation: 0,
    })
}

/// Breeds the next generation. Returns it together with the number of
/// objective evaluations spent (one per non-elite child).
pub fn step_generation(
    function: &ObjectiveFunction,
    pop: &Population,
    params: &GaParams,
    rng: &mut GaRng,
) -> (Population, u64) {
    debug_assert!(params.validate().is_ok());
    let n = params.population_size;
    let elites = params.elite_count.min(pop.len());
    let tsize = params.tournament_size.min(pop.len());
    let mut members = Vec::with_capacity(n);
    for &i in pop.ranking().iter().take(elites) {
        members.push(pop.members[i].clone());
    }
    let mut evaluations = 0;
    while members.len() < n {
        let a = tournament(pop, tsize, rng);
        let mut genome = if rng.random::<f64>() < params.crossover_rate {
            let b = tournament(pop, tsize, rng);
            let lambda: f64 = rng.random();
            a.genome
                .iter()
                .zip(&b.genome)
                .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
                .collect()
        } else {
            a.genome.clone()
        };
        mutate(&mut genome, function, params, rng);
        let fitness = function.evaluate_unchecked(&genome);
        evaluations += 1;
        members.push(Individual { genome, fitness });
    }
    (
        Population {
            members,
            generation: pop.generation + 1,
        },
        evaluations,
    )
}

/// Applies a partial parameter assignment to a live population.
///
/// Shrinking keeps the fittest members (fittest first). Growing appends
/// mutated clones of uniformly drawn members; only those are evaluated.
/// Returns the new population, the new parameters and the evaluations spent.
pub fn apply_strategy_step(
    function: &ObjectiveFunction,
    pop: &Population,
    current: &GaParams,
    assignments: &ParamOverrides,
    rng: &mut GaRng,
) -> Result<(Population, GaParams, u64)> {
    let params = assignments.apply(current)?;
    let target = params.population_size;
    let mut next = pop.clone();
    let mut evaluations = 0;
    match target.cmp(&pop.len()) {
        Ordering::Less => {
            next.members = pop
                .ranking()
                .into_iter()
                .take(target)
                .map(|i| pop.members[i].clone())
                .collect();
        }
        Ordering::Greater => {
            let original = pop.len();
            while next.members.len() < target {
                let source = rng.random_range(0..original);
                let mut genome = pop.members[source].genome.clone();
                mutate(&mut genome, function, &params, rng);
                let fitness = function.evaluate_unchecked(&genome);
                evaluations += 1;
                next.members.push(Individual { genome, fitness });
            }
        }
        Ordering::Equal => {}
    }
    Ok((next, params, evaluations))
}

/// A GA run in progress. Owns the population, active parameters, random
/// stream and evaluation counter so a run can be paused and resumed, which
/// the two-stage orchestrator relies on.
#[derive(Debug, Clone)]
pub struct GaRun<'f> {
    function: &'f ObjectiveFunction,
    params: GaParams,
    population: Population,
    rng: GaRng,
    evaluations: u64,
    best_so_far: f64,
}

impl<'f> GaRun<'f> {
    pub fn new(function: &'f ObjectiveFunction, params: GaParams, seed: u64) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let population = init_population(function, &params, &mut rng)?;
        let evaluations = population.len() as u64;
        let best_so_far = population.best_fitness();
        Ok(Self {
            function,
            params,
            population,
            rng,
            evaluations,
            best_so_far,
        })
    }

    pub fn function(&self) -> &ObjectiveFunction {
        self.function
    }

    pub fn params(&self) -> &GaParams {
        &self.params
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn generation(&self) -> usize {
        self.population.generation
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn best_fitness(&self) -> f64 {
        self.best_so_far
    }

    pub fn error(&self) -> f64 {
        (self.best_so_far - self.function.optimum_value).abs()
    }

    pub fn is_converged(&self, termination_error: f64) -> bool {
        self.error() <= termination_error
    }

    /// Whether the run must stop, and whether that is due to convergence.
    pub fn stop_reason(&self, budget: &RunBudget) -> Option<bool> {
        if self.is_converged(budget.termination_error) {
            Some(true)
        } else if self.generation() >= budget.max_generations
            || self.evaluations >= budget.max_evaluations
        {
            Some(false)
        } else {
            None
        }
    }

    pub fn step(&mut self) {
        let (next, spent) = step_generation(self.function, &self.population, &self.params, &mut self.rng);
        self.population = next;
        self.evaluations += spent;
        self.best_so_far = self.best_so_far.min(self.population.best_fitness());
    }

    pub fn apply(&mut self, assignments: &ParamOverrides) -> Result<()> {
        let (next, params, spent) = apply_strategy_step(
            self.function,
            &self.population,
            &self.params,
            assignments,
            &mut self.rng,
        )?;
        self.population = next;
        self.params = params;
        self.evaluations += spent;
        self.best_so_far = self.best_so_far.min(self.population.best_fitness());
        Ok(())
    }

    /// Fires the strategy step scheduled for the current generation, if any.
    pub fn apply_scheduled(&mut self, strategy: &Strategy) -> Result<()> {
        if let Some(step) = strategy.step_at(self.generation()) {
            self.apply(&step.assignments)?;
        }
        Ok(())
    }

    /// Steps until the budget stops the run, calling `observer` after every
    /// generation. Returns the convergence flag.
    pub fn run_until<O>(&mut self, strategy: Option<&Strategy>, budget: &RunBudget, mut observer: O) -> Result<bool>
    where
        O: FnMut(&Population),
    {
        loop {
            if let Some(converged) = self.stop_reason(budget) {
                return Ok(converged);
            }
            if let Some(strategy) = strategy {
                self.apply_scheduled(strategy)?;
            }
            self.step();
            observer(&self.population);
        }
    }
}

/// Runs the GA from scratch under an optional strategy.
pub fn run<O>(
    function: &ObjectiveFunction,
    initial: &GaParams,
    strategy: Option<&Strategy>,
    budget: &RunBudget,
    seed: u64,
    observer: O,
) -> Result<RunResult>
where
    O: FnMut(&Population),
{
    initial.validate()?;
    budget.validate()?;
    if let Some(s) = strategy {
        s.validate()?;
    }
    let started = Instant::now();
    let strategy_id = strategy.map_or_else(|| "none".to_string(), |s| s.id.clone());
    if budget.max_generations == 0 {
        return Ok(RunResult {
            function: function.id.clone(),
            seed,
            strategy_id,
            evaluations: 0,
            generations: 0,
            best_fitness: f64::INFINITY,
            converged: false,
            wall_ms: 0.0,
        });
    }
    let mut state = GaRun::new(function, *initial, seed)?;
    let converged = state.run_until(strategy, budget, observer)?;
    Ok(RunResult {
        function: function.id.clone(),
        seed,
        strategy_id,
        evaluations: state.evaluations(),
        generations: state.generation(),
        best_fitness: state.best_fitness(),
        converged,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Registry;

    fn reg(n: usize) -> Registry {
        Registry::builtin(n).unwrap()
    }

    fn params(n: usize) -> GaParams {
        GaParams {
            population_size: n,
            ..GaParams::default()
        }
    }

    #[test]
    fn init_is_deterministic_and_in_bounds() {
        let r = reg(10);
        let f = r.get("ackley").unwrap();
        let a = init_population(f, &params(40), &mut rng_from_seed(5)).unwrap();
        let b = init_population(f, &params(40), &mut rng_from_seed(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 40);
        for m in &a.members {
            assert!(f.domain.contains(&m.genome));
            assert_eq!(m.fitness, f.evaluate(&m.genome).unwrap());
        }
        assert!(matches!(
            init_population(f, &params(1), &mut rng_from_seed(5)),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn params_validation() {
        assert!(GaParams::default().validate().is_ok());
        let bad = [
            GaParams { mutation_rate: 1.5, ..GaParams::default() },
            GaParams { crossover_rate: -0.1, ..GaParams::default() },
            GaParams { tournament_size: 61, ..GaParams::default() },
            GaParams { tournament_size: 0, ..GaParams::default() },
            GaParams { elite_count: 60, ..GaParams::default() },
            GaParams { mutation_sigma_fraction: f64::NAN, ..GaParams::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn elitism_keeps_best_non_increasing() {
        let r = reg(5);
        let f = r.get("rastrigin").unwrap();
        let p = params(30);
        let mut rng = rng_from_seed(1);
        let mut pop = init_population(f, &p, &mut rng).unwrap();
        let mut best = pop.best_fitness();
        for _ in 0..100 {
            let (next, spent) = step_generation(f, &pop, &p, &mut rng);
            assert_eq!(spent, 29);
            assert_eq!(next.len(), 30);
            assert_eq!(next.generation, pop.generation + 1);
            assert!(next.best_fitness() <= best);
            best = next.best_fitness();
            pop = next;
        }
    }

    #[test]
    fn degenerate_operators_copy_the_best() {
        let r = reg(4);
        let f = r.get("ackley").unwrap();
        let p = GaParams {
            population_size: 20,
            mutation_rate: 0.0,
            crossover_rate: 0.0,
            tournament_size: 20,
            ..GaParams::default()
        };
        let mut rng = rng_from_seed(9);
        let pop = init_population(f, &p, &mut rng).unwrap();
        let best = pop.best().unwrap().clone();
        let (next, _) = step_generation(f, &pop, &p, &mut rng);
        assert!(next.members.iter().all(|m| *m == best));
    }

    #[test]
    fn step_is_deterministic() {
        let r = reg(3);
        let f = r.get("gaussian").unwrap();
        let p = params(10);
        let pop = init_population(f, &p, &mut rng_from_seed(2)).unwrap();
        let a = step_generation(f, &pop, &p, &mut rng_from_seed(3));
        let b = step_generation(f, &pop, &p, &mut rng_from_seed(3));
        assert_eq!(a, b);
    }

    #[test]
    fn shrink_keeps_fittest() {
        let r = reg(3);
        let f = r.get("ackley").unwrap();
        let mut rng = rng_from_seed(11);
        let pop = init_population(f, &params(60), &mut rng).unwrap();
        let overrides = ParamOverrides {
            population_size: Some(40),
            ..Default::default()
        };
        let (next, p, spent) = apply_strategy_step(f, &pop, &params(60), &overrides, &mut rng).unwrap();
        assert_eq!(spent, 0);
        assert_eq!(p.population_size, 40);
        let mut all: Vec<f64> = pop.members.iter().map(|m| m.fitness).collect();
        all.sort_by(f64::total_cmp);
        let mut kept: Vec<f64> = next.members.iter().map(|m| m.fitness).collect();
        kept.sort_by(f64::total_cmp);
        assert_eq!(kept, all[..40].to_vec());
    }

    #[test]
    fn grow_preserves_originals() {
        let r = reg(3);
        let f = r.get("ackley").unwrap();
        let mut rng = rng_from_seed(12);
        let pop = init_population(f, &params(40), &mut rng).unwrap();
        let overrides = ParamOverrides {
            population_size: Some(60),
            ..Default::default()
        };
        let (next, _, spent) = apply_strategy_step(f, &pop, &params(40), &overrides, &mut rng).unwrap();
        assert_eq!(spent, 20);
        assert_eq!(next.len(), 60);
        assert_eq!(&next.members[..40], &pop.members[..]);
        for m in &next.members[40..] {
            assert!(f.domain.contains(&m.genome));
        }
    }

    #[test]
    fn empty_override_is_identity() {
        let r = reg(3);
        let f = r.get("ackley").unwrap();
        let mut rng = rng_from_seed(13);
        let pop = init_population(f, &params(40), &mut rng).unwrap();
        let before = rng.clone();
        let (next, p, spent) =
            apply_strategy_step(f, &pop, &params(40), &ParamOverrides::default(), &mut rng).unwrap();
        assert_eq!(next, pop);
        assert_eq!(p, params(40));
        assert_eq!(spent, 0);
        assert_eq!(rng, before);
    }

    #[test]
    fn invalid_override_rejected() {
        let r = reg(2);
        let f = r.get("ackley").unwrap();
        let mut rng = rng_from_seed(1);
        let pop = init_population(f, &params(10), &mut rng).unwrap();
        let o = ParamOverrides {
            mutation_rate: Some(2.0),
            ..Default::default()
        };
        assert!(apply_strategy_step(f, &pop, &params(10), &o, &mut rng).is_err());
    }

    #[test]
    fn strategy_validation() {
        let o = ParamOverrides {
            population_size: Some(40),
            ..Default::default()
        };
        let s = Strategy {
            id: "s".into(),
            steps: vec![
                StrategyStep { trigger_generation: 5, assignments: o },
                StrategyStep { trigger_generation: 5, assignments: o },
            ],
        };
        assert!(matches!(s.validate(), Err(Error::InvalidStrategy(_))));
        assert_eq!(s.rebased(10).steps[0].trigger_generation, 15);
    }

    fn budget(gens: usize, fes: u64) -> RunBudget {
        RunBudget {
            max_generations: gens,
            max_evaluations: fes,
            termination_error: 1e-6,
        }
    }

    #[test]
    fn zero_generations_returns_immediately() {
        let r = reg(2);
        let f = r.get("ackley").unwrap();
        let res = run(f, &params(20), None, &budget(0, 1000), 1, |_| {}).unwrap();
        assert!(!res.converged);
        assert_eq!(res.generations, 0);
        assert_eq!(res.evaluations, 0);
    }

    #[test]
    fn identity_strategy_matches_no_strategy() {
        let r = reg(5);
        let f = r.get("rastrigin").unwrap();
        let b = budget(50, 100_000);
        let mut a = run(f, &params(30), None, &b, 4, |_| {}).unwrap();
        let mut c = run(f, &params(30), Some(&Strategy::identity("none")), &b, 4, |_| {}).unwrap();
        a.wall_ms = 0.0;
        c.wall_ms = 0.0;
        assert_eq!(a, c);
    }

    #[test]
    fn evaluation_accounting_and_sizes() {
        let r = reg(4);
        let f = r.get("ackley").unwrap();
        let strategy = Strategy {
            id: "resize".into(),
            steps: vec![
                StrategyStep {
                    trigger_generation: 3,
                    assignments: ParamOverrides { population_size: Some(50), ..Default::default() },
                },
                StrategyStep {
                    trigger_generation: 6,
                    assignments: ParamOverrides { population_size: Some(20), ..Default::default() },
                },
            ],
        };
        let b = budget(10, 1_000_000);
        let mut sizes = Vec::new();
        let res = run(f, &params(30), Some(&strategy), &b, 8, |p| sizes.push(p.len())).unwrap();
        assert_eq!(sizes, vec![30, 30, 30, 50, 50, 50, 20, 20, 20, 20]);
        // 30 initial, 29 per gen for 3 gens, +20 growth, 49 x 3, 19 x 4
        assert_eq!(res.evaluations, 30 + 3 * 29 + 20 + 3 * 49 + 4 * 19);
        assert_eq!(res.generations, 10);
    }

    #[test]
    fn respects_evaluation_budget() {
        let r = reg(10);
        let f = r.get("ackley").unwrap();
        let res = run(f, &params(60), None, &budget(10_000, 1_000), 3, |_| {}).unwrap();
        assert!(!res.converged);
        assert!(res.evaluations >= 1_000 && res.evaluations < 1_000 + 60);
    }

    #[test]
    fn gaussian_2d_converges() {
        let r = reg(2);
        let f = r.get("gaussian").unwrap();
        let p = GaParams {
            population_size: 40,
            ..GaParams::default()
        };
        let b = budget(2_000, 200_000);
        let mut converged = 0;
        for seed in 0..20 {
            let res = run(f, &p, None, &b, seed, |_| {}).unwrap();
            if res.converged {
                assert!(res.best_fitness <= 1e-6);
                converged += 1;
            }
        }
        assert_eq!(converged, 20);
    }

    #[test]
    fn run_is_reproducible() {
        let r = reg(10);
        let f = r.get("ackley").unwrap();
        let b = budget(200, 100_000);
        let mut a = run(f, &params(60), None, &b, 77, |_| {}).unwrap();
        let mut c = run(f, &params(60), None, &b, 77, |_| {}).unwrap();
        a.wall_ms = 0.0;
        c.wall_ms = 0.0;
        assert_eq!(a, c);
    }
}
