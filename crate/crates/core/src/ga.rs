//! Generational genetic algorithm in the style of GENESIS.
//!
//! Each generation is evaluated, summarized, and then replaced wholesale:
//! fitness-proportional stochastic universal sampling picks the parents, the
//! mating pool is shuffled and paired, pairs undergo two-point crossover, and
//! every child is mutated. There is no fitness scaling and no elitism.
//!
//! All randomness comes from [`crate::rng`] streams keyed by the master seed,
//! the generation and the individual, so results do not depend on how many
//! threads evaluate the population.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::concept::{self, check_noise, BitVector32, TaskSetup};
use crate::error::{Error, Result};
use crate::genotype::{
    self, crossover, mutate_with, DirectionOnlyGenotype, Genome, HnAllele, HnGenotype, InitDistribution,
    MutationKind, BiasGenotype, GENE_COUNT, HN_GENE_COUNT,
};
use crate::rng::{stream, Purpose};
use crate::trajectory::TrajectorySchedule;

/// Which genome the population carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenomeKind {
    /// Directions plus evolved strengths (288 bits).
    Full,
    /// Directions only; strength comes from the schedule (32 bits).
    DirectionOnly,
    /// Twenty trinary switches.
    Hn,
}

impl fmt::Display for GenomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenomeKind::Full => "full",
            GenomeKind::DirectionOnly => "direction-only",
            GenomeKind::Hn => "hn",
        })
    }
}

impl FromStr for GenomeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(GenomeKind::Full),
            "direction-only" => Ok(GenomeKind::DirectionOnly),
            "hn" => Ok(GenomeKind::Hn),
            _ => Err(Error::Parse(format!("unknown genome kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: u32,
    pub crossover_rate: f64,
    /// Per-locus probability of a mutation event.
    pub mutation_rate: f64,
    pub mutation_kind: MutationKind,
    /// Class-noise level; unused by HN runs.
    pub noise_p: f64,
    pub init: InitDistribution,
    pub schedule: TrajectorySchedule,
    pub master_seed: u64,
    pub genome_kind: GenomeKind,
    pub target: BitVector32,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 1000,
            generations: 10_000,
            crossover_rate: 0.6,
            mutation_rate: 0.001,
            mutation_kind: MutationKind::Resample,
            noise_p: 0.001,
            init: InitDistribution::Uniform,
            schedule: TrajectorySchedule::Evolved,
            master_seed: 42,
            genome_kind: GenomeKind::Full,
            target: BitVector32::ones(),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.population_size < 2 {
            return bad(format!("population size must be at least 2, got {}", self.population_size));
        }
        if self.generations < 1 {
            return bad("at least one generation is required".into());
        }
        for (name, rate) in [("crossover rate", self.crossover_rate), ("mutation rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return bad(format!("{name} must be in [0, 1], got {rate}"));
            }
        }
        check_noise(self.noise_p)?;
        self.schedule.validate()?;
        match (self.genome_kind, self.schedule.is_evolved()) {
            (GenomeKind::DirectionOnly, true) => {
                bad("a direction-only genome needs a forced strength schedule".into())
            }
            (GenomeKind::Full, false) => {
                bad("a forced schedule replaces the strength genes; use the direction-only genome".into())
            }
            (GenomeKind::Hn, false) => bad("HN runs take no strength schedule".into()),
            _ => Ok(()),
        }
    }

    fn task(&self) -> Result<TaskSetup> {
        TaskSetup::new(self.target, self.noise_p)
    }
}

/// Population averages for one generation, measured before reproduction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    /// 1-based.
    pub generation: u32,
    pub avg_fitness: f64,
    pub avg_bias_strength: f64,
    pub avg_bias_correctness: f64,
    /// Frequencies of ZERO, ONE, QUESTION alleles in HN runs.
    pub allele_freqs: Option<[f64; 3]>,
}

/// What evaluating one individual produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Assessment {
    pub fitness: f64,
    /// Mean effective strength used by the guess model.
    pub bias_strength: f64,
    /// Smallest and largest effective strength gene.
    pub strength_range: (f64, f64),
    pub bias_correctness: f64,
    /// ZERO, ONE, QUESTION counts (HN only).
    pub allele_counts: [u32; 3],
}

/// Read-only view handed to run observers after each evaluation pass.
pub struct GenerationReport<'a> {
    pub stats: &'a GenerationStats,
    pub assessments: &'a [Assessment],
}

/// Evaluation inputs shared by every individual in a generation.
#[derive(Clone, Copy, Debug)]
pub struct EvalContext {
    pub task: TaskSetup,
    pub forced_strength: Option<f64>,
}

/// A genome the engine can create and evaluate.
pub trait Organism: Genome + Send + Sync {
    fn spawn<R: Rng + ?Sized>(config: &GaConfig, rng: &mut R) -> Self;
    fn assess<R: Rng + ?Sized>(&self, ctx: &EvalContext, rng: &mut R) -> Assessment;
}

fn range_of(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

impl Organism for BiasGenotype {
    fn spawn<R: Rng + ?Sized>(config: &GaConfig, rng: &mut R) -> Self {
        genotype::random_genotype(config.init, rng)
    }

    fn assess<R: Rng + ?Sized>(&self, ctx: &EvalContext, rng: &mut R) -> Assessment {
        let strengths = self.strengths();
        let fitness = concept::evaluate_with(self.directions(), &strengths, &ctx.task, rng).value();
        Assessment {
            fitness,
            bias_strength: strengths.iter().sum::<f64>() / GENE_COUNT as f64,
            strength_range: range_of(&strengths),
            bias_correctness: concept::bias_correctness(self.directions(), ctx.task.target()),
            allele_counts: [0; 3],
        }
    }
}

impl Organism for DirectionOnlyGenotype {
    fn spawn<R: Rng + ?Sized>(_config: &GaConfig, rng: &mut R) -> Self {
        genotype::random_direction_only(rng)
    }

    fn assess<R: Rng + ?Sized>(&self, ctx: &EvalContext, rng: &mut R) -> Assessment {
        let s = ctx.forced_strength.expect("validated: direction-only runs have a forced schedule");
        let strengths = [s; GENE_COUNT];
        let fitness = concept::evaluate_with(self.directions(), &strengths, &ctx.task, rng).value();
        Assessment {
            fitness,
            bias_strength: strengths.iter().sum::<f64>() / GENE_COUNT as f64,
            strength_range: range_of(&strengths),
            bias_correctness: concept::bias_correctness(self.directions(), ctx.task.target()),
            allele_counts: [0; 3],
        }
    }
}

impl Organism for HnGenotype {
    fn spawn<R: Rng + ?Sized>(_config: &GaConfig, rng: &mut R) -> Self {
        genotype::random_hn_genotype(rng)
    }

    /// Strength is the fraction of fixed (non-`?`) switches and correctness
    /// the fraction of switches fixed closed.
    fn assess<R: Rng + ?Sized>(&self, _ctx: &EvalContext, rng: &mut R) -> Assessment {
        let counts = HnAllele::ALL.map(|a| self.count(a) as u32);
        let n = HN_GENE_COUNT as f64;
        let fixed = f64::from(counts[0] + counts[1]) / n;
        let strength_range = if counts[2] == 0 {
            (1.0, 1.0)
        } else if fixed == 0.0 {
            (0.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        Assessment {
            fitness: concept::hn_evaluate(self, rng),
            bias_strength: fixed,
            strength_range,
            bias_correctness: f64::from(counts[1]) / n,
            allele_counts: counts,
        }
    }
}

/// Stochastic universal sampling. Returns `count` indices into `fitnesses`.
///
/// Pointers are spaced `ΣF / count` apart from one uniform offset, so an
/// individual with fitness `F_j` is chosen `⌊count·F_j/ΣF⌋` or one more
/// times. When every fitness is zero all individuals are weighted equally.
pub fn select<R: Rng + ?Sized>(fitnesses: &[f64], count: usize, rng: &mut R) -> Result<Vec<usize>> {
    if fitnesses.is_empty() {
        return Err(Error::MalformedPopulation("cannot select from an empty population".into()));
    }
    if let Some(bad) = fitnesses.iter().find(|f| !(f.is_finite() && **f >= 0.0)) {
        return Err(Error::MalformedPopulation(format!("fitness {bad} is not a finite non-negative value")));
    }
    let total: f64 = fitnesses.iter().sum();
    let uniform = total <= 0.0;
    let weight = |i: usize| if uniform { 1.0 } else { fitnesses[i] };
    let total = if uniform { fitnesses.len() as f64 } else { total };

    let spacing = total / count as f64;
    let offset = rng.gen::<f64>() * spacing;
    let last = fitnesses.len() - 1;
    let mut chosen = Vec::with_capacity(count);
    let mut i = 0;
    let mut edge = weight(0);
    for k in 0..count {
        let pointer = offset + k as f64 * spacing;
        while pointer >= edge && i < last {
            i += 1;
            edge += weight(i);
        }
        chosen.push(i);
    }
    Ok(chosen)
}

fn aggregate(generation: u32, assessments: &[Assessment], hn: bool) -> GenerationStats {
    let n = assessments.len() as f64;
    let mut fit = 0.0;
    let mut strength = 0.0;
    let mut correct = 0.0;
    let mut counts = [0u64; 3];
    for a in assessments {
        fit += a.fitness;
        strength += a.bias_strength;
        correct += a.bias_correctness;
        for (c, &x) in counts.iter_mut().zip(&a.allele_counts) {
            *c += u64::from(x);
        }
    }
    let allele_freqs = hn.then(|| {
        let total = (counts.iter().sum::<u64>()).max(1) as f64;
        counts.map(|c| c as f64 / total)
    });
    GenerationStats {
        generation,
        avg_fitness: fit / n,
        avg_bias_strength: strength / n,
        avg_bias_correctness: correct / n,
        allele_freqs,
    }
}

/// Seeded first generation.
pub fn initial_population<G: Organism>(config: &GaConfig) -> Vec<G> {
    (0..config.population_size)
        .map(|i| G::spawn(config, &mut stream(config.master_seed, Purpose::Init, 0, i as u64)))
        .collect()
}

/// Evaluate every individual of `population` as generation `generation`.
pub fn assess_population<G: Organism>(
    population: &[G],
    config: &GaConfig,
    generation: u32,
) -> Result<Vec<Assessment>> {
    let ctx = EvalContext {
        task: config.task()?,
        forced_strength: config.schedule.strength_at(generation),
    };
    let seed = config.master_seed;
    Ok(population
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let mut rng = stream(seed, Purpose::Evaluate, u64::from(generation), i as u64);
            g.assess(&ctx, &mut rng)
        })
        .collect())
}

/// Build the next population from an evaluated one.
pub fn reproduce<G: Organism>(
    population: &[G],
    assessments: &[Assessment],
    config: &GaConfig,
    generation: u32,
) -> Result<Vec<G>> {
    if population.len() != assessments.len() {
        return Err(Error::MalformedPopulation(format!(
            "{} individuals but {} assessments",
            population.len(),
            assessments.len()
        )));
    }
    let mut rng = stream(config.master_seed, Purpose::Reproduce, u64::from(generation), 0);
    let fitnesses: Vec<f64> = assessments.iter().map(|a| a.fitness).collect();
    let mut parents = select(&fitnesses, population.len(), &mut rng)?;
    parents.shuffle(&mut rng);

    let mut next = Vec::with_capacity(population.len());
    for pair in parents.chunks(2) {
        match *pair {
            [a, b] => {
                let (x, y) = crossover(&population[a], &population[b], config.crossover_rate, &mut rng)?;
                next.push(x);
                next.push(y);
            }
            [a] => next.push(population[a].clone()),
            _ => unreachable!(),
        }
    }
    for child in &mut next {
        mutate_with(child, config.mutation_rate, config.mutation_kind, &mut rng);
    }
    Ok(next)
}

/// One generation: evaluate, record statistics, reproduce.
pub fn step<G: Organism>(
    population: &[G],
    config: &GaConfig,
    generation: u32,
) -> Result<(Vec<G>, GenerationStats)> {
    let (next, stats, _) = step_detailed(population, config, generation)?;
    Ok((next, stats))
}

fn step_detailed<G: Organism>(
    population: &[G],
    config: &GaConfig,
    generation: u32,
) -> Result<(Vec<G>, GenerationStats, Vec<Assessment>)> {
    if generation < 1 {
        return Err(Error::InvalidConfig("generations are numbered from 1".into()));
    }
    let assessments = assess_population(population, config, generation)?;
    let stats = aggregate(generation, &assessments, config.genome_kind == GenomeKind::Hn);
    let next = reproduce(population, &assessments, config, generation)?;
    Ok((next, stats, assessments))
}

/// Table-style digest of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub first_above_zero: Option<u32>,
    pub first_above_half: Option<u32>,
    pub generations_between: Option<u32>,
    pub initial_bias_strength: f64,
    pub strength_at_first_above_zero: Option<f64>,
    pub strength_at_first_above_half: Option<f64>,
    /// Number of trailing generations averaged below.
    pub final_window: usize,
    pub final_fitness: f64,
    pub final_bias_strength: f64,
    pub final_bias_correctness: f64,
    pub final_allele_freqs: Option<[f64; 3]>,
}

/// Summarize a statistics series.
pub fn summarize(stats: &[GenerationStats]) -> Result<RunSummary> {
    if stats.is_empty() {
        return Err(Error::InvalidConfig("cannot summarize an empty run".into()));
    }
    let first = |threshold: f64| stats.iter().find(|s| s.avg_fitness > threshold);
    let above_zero = first(0.0);
    let above_half = first(0.5);
    let window = stats.len().min(1000);
    let tail = &stats[stats.len() - window..];
    let mean = |f: &dyn Fn(&GenerationStats) -> f64| tail.iter().map(f).sum::<f64>() / window as f64;
    let final_allele_freqs = tail[0].allele_freqs.map(|_| {
        let mut acc = [0.0; 3];
        for s in tail {
            for (a, f) in acc.iter_mut().zip(s.allele_freqs.unwrap_or_default()) {
                *a += f;
            }
        }
        acc.map(|a| a / window as f64)
    });
    Ok(RunSummary {
        first_above_zero: above_zero.map(|s| s.generation),
        first_above_half: above_half.map(|s| s.generation),
        generations_between: match (above_zero, above_half) {
            (Some(a), Some(b)) => Some(b.generation - a.generation),
            _ => None,
        },
        initial_bias_strength: stats[0].avg_bias_strength,
        strength_at_first_above_zero: above_zero.map(|s| s.avg_bias_strength),
        strength_at_first_above_half: above_half.map(|s| s.avg_bias_strength),
        final_window: window,
        final_fitness: mean(&|s| s.avg_fitness),
        final_bias_strength: mean(&|s| s.avg_bias_strength),
        final_bias_correctness: mean(&|s| s.avg_bias_correctness),
        final_allele_freqs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: GaConfig,
    pub stats: Vec<GenerationStats>,
    pub summary: RunSummary,
}

/// Run the configured number of generations.
pub fn run(config: &GaConfig) -> Result<RunResult> {
    run_observed(config, |_| {})
}

/// Like [`run`], calling `observer` after every evaluation pass.
pub fn run_observed<F>(config: &GaConfig, observer: F) -> Result<RunResult>
where
    F: FnMut(&GenerationReport<'_>),
{
    config.validate()?;
    match config.genome_kind {
        GenomeKind::Full => run_generic::<BiasGenotype, F>(config, observer),
        GenomeKind::DirectionOnly => run_generic::<DirectionOnlyGenotype, F>(config, observer),
        GenomeKind::Hn => run_generic::<HnGenotype, F>(config, observer),
    }
}

fn run_generic<G: Organism, F>(config: &GaConfig, mut observer: F) -> Result<RunResult>
where
    F: FnMut(&GenerationReport<'_>),
{
    let mut population = initial_population::<G>(config);
    let mut stats = Vec::with_capacity(config.generations as usize);
    for generation in 1..=config.generations {
        let (next, s, assessments) = step_detailed(&population, config, generation)?;
        observer(&GenerationReport { stats: &s, assessments: &assessments });
        stats.push(s);
        population = next;
    }
    let summary = summarize(&stats)?;
    Ok(RunResult { config: config.clone(), stats, summary })
}
