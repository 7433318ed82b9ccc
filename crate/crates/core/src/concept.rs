//! The noisy Boolean-concept task and the Hinton–Nowlan switch task.
//!
//! A concept over five Boolean features is its 32-entry truth table. An
//! individual sees a training copy of the target table in which every class
//! label has been flipped with probability `p`, guesses each entry by mixing
//! its instinct (bias direction) with what it observed (weighted by bias
//! strength), and is scored against an independently corrupted test copy.
//! Only a perfect test score earns a non-zero fitness, `(1 - p)^-32`, which
//! normalizes the expected fitness of a correct pure instinct to exactly 1.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genotype::{HnAllele, HnGenotype, BiasGenotype, GENE_COUNT};

/// A 32-case truth table. Bit `i` is case `i`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BitVector32(u32);

impl BitVector32 {
    pub const fn new(bits: u32) -> Self {
        BitVector32(bits)
    }

    pub const fn zeros() -> Self {
        BitVector32(0)
    }

    pub const fn ones() -> Self {
        BitVector32(u32::MAX)
    }

    pub fn from_bools(bits: &[bool]) -> Result<Self> {
        if bits.len() != GENE_COUNT {
            return Err(Error::InvalidGenotype(format!(
                "expected {GENE_COUNT} bits, got {}",
                bits.len()
            )));
        }
        Ok(BitVector32(
            bits.iter()
                .enumerate()
                .fold(0, |acc, (i, &b)| acc | (u32::from(b) << i)),
        ))
    }

    pub const fn raw(self) -> u32 {
        self.0
    }

    pub fn get(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if value {
            self.0 |= 1 << i;
        } else {
            self.0 &= !(1 << i);
        }
    }

    pub fn count_ones(self) -> u32 {
        self.0.count_ones()
    }

    /// Number of cases on which `self` and `other` agree.
    pub fn agreements(self, other: BitVector32) -> u32 {
        (!(self.0 ^ other.0)).count_ones()
    }

    pub fn complement(self) -> Self {
        BitVector32(!self.0)
    }

    pub fn iter(self) -> impl Iterator<Item = bool> {
        (0..GENE_COUNT).map(move |i| self.get(i))
    }
}

impl fmt::Debug for BitVector32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector32({self})")
    }
}

impl fmt::Display for BitVector32 {
    /// Case 0 first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.iter().try_for_each(|b| f.write_str(if b { "1" } else { "0" }))
    }
}

/// Target concept and class-noise level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSetup {
    target: BitVector32,
    noise_p: f64,
}

impl TaskSetup {
    /// Requires `0 <= noise_p < 0.5`.
    pub fn new(target: BitVector32, noise_p: f64) -> Result<Self> {
        check_noise(noise_p)?;
        Ok(TaskSetup { target, noise_p })
    }

    /// The constant-one target used throughout the experiments.
    pub fn all_ones(noise_p: f64) -> Result<Self> {
        Self::new(BitVector32::ones(), noise_p)
    }

    pub fn target(&self) -> BitVector32 {
        self.target
    }

    pub fn noise_p(&self) -> f64 {
        self.noise_p
    }
}

pub(crate) fn check_noise(p: f64) -> Result<()> {
    if (0.0..0.5).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("noise level must be in [0, 0.5), got {p}")))
    }
}

/// Fitness of one evaluation: zero, or the perfect-score value for the task.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FitnessScore(pub f64);

impl FitnessScore {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_perfect(self) -> bool {
        self.0 > 0.0
    }
}

/// Score awarded for a perfect test match: `(1 - p)^-32`.
pub fn perfect_score(p: f64) -> f64 {
    (1.0 - p).powi(-(GENE_COUNT as i32))
}

/// Flip each bit of `target` independently with probability `p`.
pub fn corrupt<R: Rng + ?Sized>(target: BitVector32, p: f64, rng: &mut R) -> BitVector32 {
    if p <= 0.0 {
        return target;
    }
    let mut mask = 0u32;
    for i in 0..GENE_COUNT {
        if rng.gen_bool(p) {
            mask |= 1 << i;
        }
    }
    BitVector32(target.0 ^ mask)
}

/// The per-case guess rule. Instinct and observation agree: answer it.
/// Otherwise follow instinct with probability `strength`, else the observation.
#[inline]
pub fn guess_locus<R: Rng + ?Sized>(direction: bool, strength: f64, observed: bool, rng: &mut R) -> bool {
    if direction == observed || strength >= 1.0 {
        direction
    } else if strength <= 0.0 {
        observed
    } else if rng.gen_bool(strength) {
        direction
    } else {
        observed
    }
}

/// Guess with explicit per-case directions and strengths.
pub fn guess_with<R: Rng + ?Sized>(
    directions: BitVector32,
    strengths: &[f64; GENE_COUNT],
    train: BitVector32,
    rng: &mut R,
) -> BitVector32 {
    let mut out = directions;
    let disagree = directions.0 ^ train.0;
    if disagree == 0 {
        return out;
    }
    for (i, &s) in strengths.iter().enumerate() {
        if disagree >> i & 1 == 1 {
            out.set(i, guess_locus(directions.get(i), s, train.get(i), rng));
        }
    }
    out
}

/// Guess the test labels from a genotype and the observed training labels.
pub fn guess<R: Rng + ?Sized>(genotype: &BiasGenotype, train: BitVector32, rng: &mut R) -> BitVector32 {
    guess_with(genotype.directions(), &genotype.strengths(), train, rng)
}

/// `(1 - p)^-32` for an exact match, otherwise zero.
pub fn fitness(guess: BitVector32, test: BitVector32, p: f64) -> FitnessScore {
    if guess == test {
        FitnessScore(perfect_score(p))
    } else {
        FitnessScore(0.0)
    }
}

/// One lifetime: fresh training and test corruptions, a guess, a score.
pub fn evaluate_with<R: Rng + ?Sized>(
    directions: BitVector32,
    strengths: &[f64; GENE_COUNT],
    task: &TaskSetup,
    rng: &mut R,
) -> FitnessScore {
    let train = corrupt(task.target, task.noise_p, rng);
    let test = corrupt(task.target, task.noise_p, rng);
    let g = guess_with(directions, strengths, train, rng);
    fitness(g, test, task.noise_p)
}

pub fn evaluate<R: Rng + ?Sized>(genotype: &BiasGenotype, task: &TaskSetup, rng: &mut R) -> FitnessScore {
    evaluate_with(genotype.directions(), &genotype.strengths(), task, rng)
}

/// Probability that pure learning (all strengths 0) scores perfectly:
/// `(1 - 2p + 2p²)^32`.
pub fn perfect_probability_pure_learning(p: f64) -> f64 {
    (1.0 - 2.0 * p + 2.0 * p * p).powi(GENE_COUNT as i32)
}

/// Probability that a correct pure instinct scores perfectly: `(1 - p)^32`.
pub fn perfect_probability_pure_instinct_correct(p: f64) -> f64 {
    (1.0 - p).powi(GENE_COUNT as i32)
}

pub fn expected_fitness_pure_learning(p: f64) -> f64 {
    perfect_probability_pure_learning(p) * perfect_score(p)
}

/// Identically 1 up to rounding.
pub fn expected_fitness_pure_instinct_correct(p: f64) -> f64 {
    perfect_probability_pure_instinct_correct(p) * perfect_score(p)
}

/// Mean strength over the 32 genes.
pub fn bias_strength(genotype: &BiasGenotype) -> f64 {
    genotype.strengths().iter().sum::<f64>() / GENE_COUNT as f64
}

/// Fraction of cases where the bias direction equals the target.
pub fn bias_correctness(directions: BitVector32, target: BitVector32) -> f64 {
    f64::from(directions.agreements(target)) / GENE_COUNT as f64
}

// ---------------------------------------------------------------------------
// Hinton–Nowlan switches

/// Guesses allowed per lifetime.
pub const HN_TRIALS: u32 = 1000;
pub const HN_MAX_FITNESS: f64 = 20.0;

fn hn_fitness_after(trials: u32) -> f64 {
    1.0 + 19.0 * f64::from(HN_TRIALS - trials) / f64::from(HN_TRIALS)
}

/// Lifetime fitness of an HN individual.
///
/// Any ZERO allele pins fitness at 1. Otherwise each trial sets every
/// undecided switch by a fair coin and succeeds when all close, so with `z`
/// QUESTION alleles the first success is geometric with `q = 2^-z`. The trial
/// index is drawn directly by inverse CDF, consuming one uniform per lifetime.
pub fn hn_evaluate<R: Rng + ?Sized>(hn: &HnGenotype, rng: &mut R) -> f64 {
    if hn.count(HnAllele::Zero) > 0 {
        return 1.0;
    }
    let z = hn.count(HnAllele::Question);
    if z == 0 {
        return HN_MAX_FITNESS;
    }
    let q = (-(z as f64)).exp2();
    let u: f64 = rng.gen();
    // P(first success > k) = (1 - q)^k.
    let failures = ((-u).ln_1p() / (-q).ln_1p()).floor();
    if failures >= f64::from(HN_TRIALS) {
        1.0
    } else {
        hn_fitness_after(failures as u32 + 1)
    }
}

/// Exact expected lifetime fitness of an HN genotype with no ZERO alleles.
pub fn hn_expected_fitness(num_ones: usize, num_questions: usize) -> Result<f64> {
    if num_ones + num_questions > crate::genotype::HN_GENE_COUNT {
        return Err(Error::InvalidGenotype(format!(
            "{num_ones} ones + {num_questions} questions exceeds 20 genes"
        )));
    }
    if num_questions == 0 {
        return Ok(HN_MAX_FITNESS);
    }
    let q = (-(num_questions as f64)).exp2();
    let mut miss = 1.0;
    let mut gain = 0.0;
    for i in 1..=HN_TRIALS {
        gain += (hn_fitness_after(i) - 1.0) * q * miss;
        miss *= 1.0 - q;
    }
    Ok(1.0 + gain)
}
