//! Generational loops for MOEA-HD and the constrained NSGA-II baseline.
//!
//! Both algorithms share representation, initialization, repair schedule
//! (initial and final population only), crossover, mutation and offspring
//! count (`k` per generation). They differ in parent selection and survival.
//!
//! Random streams: individual `i` of the initial population draws from
//! stream `i` of `master_seed`; everything else in the run draws from the
//! control stream `u64::MAX`.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diversity::{
    diversity_tournament, dwh_select, rank_then_coin, BinarizeMode, SelectionPool,
};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_with, EvaluatedSolution, ObjectiveVector, PenaltyMode};
use crate::genome::DietGenome;
use crate::instance::ProblemInstance;
use crate::ranking::{
    assign_crowding, assign_raw_fitness, crowding_distance, nondominated_sort, sort_fronts,
    FrontPartition,
};
use crate::variation::{
    crossover, individual_rng, init_population, mutate, repair, VariationConfig,
};

const CONTROL_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "moea-hd")]
    MoeaHd,
    #[serde(rename = "nsga2")]
    Nsga2,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MoeaHd => "moea-hd",
            Algorithm::Nsga2 => "nsga2",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "moea-hd" | "moeahd" => Ok(Algorithm::MoeaHd),
            "nsga2" | "nsga-ii" | "nsgaii" => Ok(Algorithm::Nsga2),
            other => Err(Error::param(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// How MOEA-HD picks its parents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TournamentMode {
    /// `k` binary tournaments, feasible pairs judged against the winners so far.
    #[default]
    PerTournament,
    /// The parents are the `k` members chosen by one greedy max-min selection.
    Wholesale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub algorithm: Algorithm,
    pub population_size: usize,
    pub max_generations: usize,
    pub variation: VariationConfig,
    pub master_seed: u64,
    pub binarize: BinarizeMode,
    pub penalty_mode: PenaltyMode,
    pub tournament: TournamentMode,
    /// Record per-generation summaries.
    pub trace: bool,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::MoeaHd,
            population_size: 30,
            max_generations: 30,
            variation: VariationConfig::default(),
            master_seed: 0,
            binarize: BinarizeMode::Weekly,
            penalty_mode: PenaltyMode::Raw,
            tournament: TournamentMode::PerTournament,
            trace: false,
        }
    }
}

impl AlgorithmConfig {
    pub fn new(algorithm: Algorithm, max_generations: usize, master_seed: u64) -> Self {
        Self {
            algorithm,
            max_generations,
            master_seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::param("population size must be at least 2"));
        }
        if self.max_generations < 1 {
            return Err(Error::param("at least one generation is required"));
        }
        self.variation.validate()
    }
}

/// Population summary after one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub generation: usize,
    pub feasible: usize,
    pub front_size: usize,
    pub mean_penalty: f64,
    pub min_cost: f64,
    pub max_protein: f64,
}

impl GenerationTrace {
    fn of(generation: usize, population: &[EvaluatedSolution]) -> Self {
        let objectives: Vec<ObjectiveVector> = population.iter().map(|s| s.objectives).collect();
        Self {
            generation,
            feasible: population.iter().filter(|s| s.feasible).count(),
            front_size: sort_fronts(&objectives).first().len(),
            mean_penalty: population.iter().map(|s| s.penalty).sum::<f64>()
                / population.len() as f64,
            min_cost: objectives
                .iter()
                .map(|o| o.cost)
                .fold(f64::INFINITY, f64::min),
            max_protein: objectives
                .iter()
                .map(|o| o.protein())
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub config: AlgorithmConfig,
    /// Final population after repair, ranked.
    pub final_population: Vec<EvaluatedSolution>,
    /// Distinct non-dominated members of the final population.
    pub nondominated: Vec<EvaluatedSolution>,
    pub generations_run: usize,
    pub wall_time: Duration,
    pub traces: Vec<GenerationTrace>,
}

pub fn run(instance: &ProblemInstance, config: &AlgorithmConfig) -> Result<RunResult> {
    match config.algorithm {
        Algorithm::MoeaHd => run_moea_hd(instance, config),
        Algorithm::Nsga2 => run_nsga2(instance, config),
    }
}

/// Runs `repetitions` independent copies of `config`; run `r` uses seed
/// `seed_base + r`. Runs execute on up to `jobs` threads (all cores when
/// `None`); results are ordered by `r`.
pub fn run_batch(
    instance: &ProblemInstance,
    config: &AlgorithmConfig,
    repetitions: usize,
    seed_base: u64,
    jobs: Option<usize>,
) -> Result<Vec<RunResult>> {
    if repetitions == 0 {
        return Err(Error::param("at least one repetition is required"));
    }
    config.validate()?;
    let one = |r: usize| {
        let seed = seed_base.wrapping_add(r as u64);
        let cfg = AlgorithmConfig {
            master_seed: seed,
            ..config.clone()
        };
        run(instance, &cfg).map_err(|e| Error::InRun {
            seed,
            source: Box::new(e),
        })
    };
    let results: Vec<Result<RunResult>> = match jobs {
        Some(1) => (0..repetitions).map(one).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))?
            .install(|| (0..repetitions).into_par_iter().map(one).collect()),
        None => (0..repetitions).into_par_iter().map(one).collect(),
    };
    results.into_iter().collect()
}

fn check_algorithm(config: &AlgorithmConfig, expected: Algorithm) -> Result<()> {
    if config.algorithm != expected {
        return Err(Error::param(format!(
            "configuration is for {}, not {expected}",
            config.algorithm
        )));
    }
    config.validate()
}

fn initial_population(
    instance: &ProblemInstance,
    config: &AlgorithmConfig,
) -> Result<Vec<EvaluatedSolution>> {
    let genomes = init_population(
        instance,
        config.population_size,
        &config.variation,
        config.master_seed,
    )?;
    genomes
        .iter()
        .map(|g| {
            let fixed = repair(g, instance, &config.variation)?;
            Ok(evaluate_with(fixed, instance, config.penalty_mode))
        })
        .collect::<Result<_>>()
        .map_err(|e| Error::InGeneration {
            generation: 0,
            source: Box::new(e),
        })
}

/// Two distinct random indices below `n`.
fn pick_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Pairs parents in selection order (the last pairs with the first when the
/// count is odd), applies crossover and mutation, and keeps `k` children.
fn make_offspring<R: Rng + ?Sized>(
    parents: &[&DietGenome],
    k: usize,
    instance: &ProblemInstance,
    config: &AlgorithmConfig,
    rng: &mut R,
) -> Result<Vec<EvaluatedSolution>> {
    let mut children = Vec::with_capacity(k + 1);
    let mut p = 0;
    while children.len() < k {
        let a = parents[p % parents.len()];
        let b = parents[(p + 1) % parents.len()];
        let (ca, cb) = crossover(a, b, &config.variation, rng)?;
        children.push(mutate(&ca, &config.variation, rng));
        children.push(mutate(&cb, &config.variation, rng));
        p += 2;
    }
    children.truncate(k);
    Ok(children
        .into_iter()
        .map(|g| evaluate_with(g, instance, config.penalty_mode))
        .collect())
}

fn finish(
    instance: &ProblemInstance,
    config: &AlgorithmConfig,
    population: Vec<EvaluatedSolution>,
    traces: Vec<GenerationTrace>,
    started: Instant,
) -> Result<RunResult> {
    let mut final_population: Vec<EvaluatedSolution> = population
        .into_iter()
        .map(|s| {
            let fixed = repair(&s.genome, instance, &config.variation)?;
            Ok(evaluate_with(fixed, instance, config.penalty_mode))
        })
        .collect::<Result<_>>()
        .map_err(|e| Error::InGeneration {
            generation: config.max_generations,
            source: Box::new(e),
        })?;
    let partition = nondominated_sort(&mut final_population);
    assign_crowding(&mut final_population, &partition);
    assign_raw_fitness(&mut final_population);

    let mut nondominated: Vec<EvaluatedSolution> = Vec::new();
    for &i in partition.first() {
        let s = &final_population[i];
        if s.feasible && !nondominated.iter().any(|t| t.genome == s.genome) {
            nondominated.push(s.clone());
        }
    }
    Ok(RunResult {
        algorithm: config.algorithm,
        seed: config.master_seed,
        config: config.clone(),
        final_population,
        nondominated,
        generations_run: config.max_generations,
        wall_time: started.elapsed(),
        traces,
    })
}

fn ranked_pool(mut members: Vec<EvaluatedSolution>, mode: BinarizeMode) -> Result<SelectionPool> {
    members.iter_mut().for_each(EvaluatedSolution::clear_ranks);
    nondominated_sort(&mut members);
    assign_raw_fitness(&mut members);
    SelectionPool::new(members, mode)
}

/// MOEA-HD: diversity-aware tournaments for mating and greedy max-min
/// weighted-Hamming selection over parents plus offspring for survival.
pub fn run_moea_hd(instance: &ProblemInstance, config: &AlgorithmConfig) -> Result<RunResult> {
    check_algorithm(config, Algorithm::MoeaHd)?;
    let started = Instant::now();
    let k = config.population_size;
    let mut rng: ChaCha8Rng = individual_rng(config.master_seed, CONTROL_STREAM);
    let mut population = initial_population(instance, config)?;
    let mut traces = Vec::new();

    for generation in 1..=config.max_generations {
        let pool = ranked_pool(population, config.binarize)?;
        let parents: Vec<usize> = match config.tournament {
            TournamentMode::PerTournament => {
                let mut winners = Vec::with_capacity(k);
                for _ in 0..k {
                    let (a, b) = pick_pair(pool.len(), &mut rng);
                    let w = diversity_tournament(&pool, a, b, &winners, &mut rng);
                    winners.push(w);
                }
                winners
            }
            TournamentMode::Wholesale => dwh_select(&pool, k, &mut rng)?.order,
        };
        let parent_genomes: Vec<&DietGenome> =
            parents.iter().map(|&i| &pool.members()[i].genome).collect();
        let offspring =
            make_offspring(&parent_genomes, k, instance, config, &mut rng).map_err(|e| {
                Error::InGeneration {
                    generation,
                    source: Box::new(e),
                }
            })?;

        let mut combined = pool.into_members();
        combined.extend(offspring);
        let pool = ranked_pool(combined, config.binarize)?;
        let chosen = dwh_select(&pool, k, &mut rng)?.order;
        let mut members: Vec<Option<EvaluatedSolution>> =
            pool.into_members().into_iter().map(Some).collect();
        population = chosen
            .iter()
            .map(|&i| members[i].take().expect("selection indices are distinct"))
            .collect();

        if config.trace {
            traces.push(GenerationTrace::of(generation, &population));
        }
    }
    finish(instance, config, population, traces, started)
}

/// Constraint-aware fronts: feasible members sorted by Pareto dominance
/// first, then infeasible members grouped by equal penalty in ascending
/// order.
pub fn constrained_fronts(population: &[EvaluatedSolution]) -> FrontPartition {
    let feasible: Vec<usize> = (0..population.len())
        .filter(|&i| population[i].feasible)
        .collect();
    let objectives: Vec<ObjectiveVector> =
        feasible.iter().map(|&i| population[i].objectives).collect();
    let mut fronts: Vec<Vec<usize>> = sort_fronts(&objectives)
        .fronts
        .into_iter()
        .map(|front| front.into_iter().map(|f| feasible[f]).collect())
        .collect();

    let mut infeasible: Vec<usize> = (0..population.len())
        .filter(|&i| !population[i].feasible)
        .collect();
    infeasible.sort_by(|&a, &b| {
        population[a]
            .penalty
            .total_cmp(&population[b].penalty)
            .then(a.cmp(&b))
    });
    for i in infeasible {
        match fronts.last_mut() {
            Some(last)
                if !population[last[0]].feasible
                    && population[last[0]].penalty == population[i].penalty =>
            {
                last.push(i)
            }
            _ => fronts.push(vec![i]),
        }
    }
    FrontPartition { fronts }
}

fn assign_constrained_ranks(population: &mut [EvaluatedSolution]) -> FrontPartition {
    let partition = constrained_fronts(population);
    for (f, front) in partition.fronts.iter().enumerate() {
        for &i in front {
            population[i].nds_rank = Some(f);
        }
    }
    assign_crowding(population, &partition);
    partition
}

/// Constrained binary tournament: feasibility, then penalty, then rank, then
/// larger crowding distance, then a coin flip.
pub fn crowded_tournament<R: Rng + ?Sized>(
    population: &[EvaluatedSolution],
    a: usize,
    b: usize,
    rng: &mut R,
) -> usize {
    let (sa, sb) = (&population[a], &population[b]);
    match (sa.feasible, sb.feasible) {
        (true, false) => return a,
        (false, true) => return b,
        (false, false) if sa.penalty != sb.penalty => {
            return if sa.penalty < sb.penalty { a } else { b };
        }
        _ => {}
    }
    if sa.nds_rank != sb.nds_rank {
        return rank_then_coin(sa, sb, a, b, rng);
    }
    let (ca, cb) = (sa.crowding.unwrap_or(0.0), sb.crowding.unwrap_or(0.0));
    if ca > cb {
        a
    } else if cb > ca {
        b
    } else if rng.gen_bool(0.5) {
        a
    } else {
        b
    }
}

/// NSGA-II survival: whole constrained fronts in order, the last partial
/// front truncated to its largest crowding distances (lower index on ties).
pub fn nsga2_survival(population: &[EvaluatedSolution], k: usize) -> Vec<usize> {
    let partition = constrained_fronts(population);
    let mut chosen = Vec::with_capacity(k);
    for front in &partition.fronts {
        if chosen.len() + front.len() <= k {
            chosen.extend_from_slice(front);
            if chosen.len() == k {
                break;
            }
            continue;
        }
        let objectives: Vec<ObjectiveVector> =
            front.iter().map(|&i| population[i].objectives).collect();
        let distance = crowding_distance(&objectives);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&x, &y| {
            distance[y]
                .total_cmp(&distance[x])
                .then(front[x].cmp(&front[y]))
        });
        chosen.extend(order.iter().take(k - chosen.len()).map(|&x| front[x]));
        break;
    }
    chosen
}

pub fn run_nsga2(instance: &ProblemInstance, config: &AlgorithmConfig) -> Result<RunResult> {
    check_algorithm(config, Algorithm::Nsga2)?;
    let started = Instant::now();
    let k = config.population_size;
    let mut rng: ChaCha8Rng = individual_rng(config.master_seed, CONTROL_STREAM);
    let mut population = initial_population(instance, config)?;
    let mut traces = Vec::new();

    for generation in 1..=config.max_generations {
        assign_constrained_ranks(&mut population);
        let parents: Vec<&DietGenome> = (0..k)
            .map(|_| {
                let (a, b) = pick_pair(population.len(), &mut rng);
                &population[crowded_tournament(&population, a, b, &mut rng)].genome
            })
            .collect();
        let offspring = make_offspring(&parents, k, instance, config, &mut rng).map_err(|e| {
            Error::InGeneration {
                generation,
                source: Box::new(e),
            }
        })?;

        let mut combined = population;
        combined.extend(offspring);
        combined.iter_mut().for_each(EvaluatedSolution::clear_ranks);
        let survivors = nsga2_survival(&combined, k);
        let mut members: Vec<Option<EvaluatedSolution>> = combined.into_iter().map(Some).collect();
        population = survivors
            .iter()
            .map(|&i| members[i].take().expect("survivor indices are distinct"))
            .collect();

        if config.trace {
            traces.push(GenerationTrace::of(generation, &population));
        }
    }
    finish(instance, config, population, traces, started)
}
