//! Genome representations and genetic operators.
//!
//! Three genomes are supported:
//!
//! * [`BiasGenotype`]: 32 bias-direction bits followed by 32 bias-strength
//!   genes, each strength an 8-bit code decoded linearly onto `[0, 1]`.
//!   Serialized as a flat 288-bit string.
//! * [`DirectionOnlyGenotype`]: the 32 direction bits alone, used when bias
//!   strength is imposed from outside by a schedule.
//! * [`HnGenotype`]: twenty trinary switch alleles `0`, `1`, `?`.
//!
//! Crossover and mutation are written once against the [`Genome`] trait, which
//! views each genome as a flat sequence of loci (bits for the binary genomes,
//! alleles for the trinary one).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::concept::BitVector32;
use crate::error::{Error, Result};

/// Number of concept cases, and therefore of direction and strength genes.
pub const GENE_COUNT: usize = 32;
/// Bits used to code one strength gene.
pub const STRENGTH_CODE_BITS: usize = 8;
/// Serialized length of a [`BiasGenotype`].
pub const FULL_GENOME_BITS: usize = GENE_COUNT + GENE_COUNT * STRENGTH_CODE_BITS;
/// Number of switches in the Hinton–Nowlan genome.
pub const HN_GENE_COUNT: usize = 20;

/// Decode an 8-bit strength code to a probability in `[0, 1]`.
pub fn decode_strength(code: u8) -> f64 {
    f64::from(code) / 255.0
}

/// Encode a strength to the nearest 8-bit code. Inputs are clamped to `[0, 1]`.
pub fn encode_strength(strength: f64) -> u8 {
    (strength.clamp(0.0, 1.0) * 255.0).round() as u8
}

// ---------------------------------------------------------------------------
// Locus-level view

/// A genome seen as a fixed-length sequence of loci.
pub trait Genome: Clone {
    fn locus_count(&self) -> usize;

    /// Exchange the value at `locus` with `other`.
    fn swap_locus(&mut self, other: &mut Self, locus: usize);

    /// Replace the value at `locus` with a different legal value.
    fn flip_locus<R: Rng + ?Sized>(&mut self, locus: usize, rng: &mut R);

    /// Replace the value at `locus` with a uniformly drawn legal value, which
    /// may equal the current one.
    fn randomize_locus<R: Rng + ?Sized>(&mut self, locus: usize, rng: &mut R);
}

/// How a mutation event changes the locus it hits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    /// The locus always changes (a bit flip).
    Flip,
    /// The locus is redrawn uniformly, so for bit genomes half of all
    /// mutation events leave the bit unchanged (GENESIS semantics).
    #[default]
    Resample,
}

/// Flip each locus independently with probability `rate`. Returns the number
/// of loci hit.
///
/// Mutation sites are located by geometric skipping, so the cost is
/// proportional to the number of events rather than the genome length.
pub fn mutate<G: Genome, R: Rng + ?Sized>(genome: &mut G, rate: f64, rng: &mut R) -> usize {
    mutate_with(genome, rate, MutationKind::Flip, rng)
}

/// Apply mutation events at per-locus probability `rate` using `kind`.
pub fn mutate_with<G: Genome, R: Rng + ?Sized>(
    genome: &mut G,
    rate: f64,
    kind: MutationKind,
    rng: &mut R,
) -> usize {
    let len = genome.locus_count();
    let hit = |g: &mut G, locus: usize, rng: &mut R| match kind {
        MutationKind::Flip => g.flip_locus(locus, rng),
        MutationKind::Resample => g.randomize_locus(locus, rng),
    };
    if rate <= 0.0 || len == 0 {
        return 0;
    }
    if rate >= 1.0 {
        for locus in 0..len {
            hit(genome, locus, rng);
        }
        return len;
    }
    let log_keep = (-rate).ln_1p();
    let mut events = 0;
    let mut locus = 0usize;
    loop {
        // Number of untouched loci before the next event ~ Geometric(rate).
        let u: f64 = rng.gen();
        let gap = ((-u).ln_1p() / log_keep).floor();
        if gap >= (len - locus) as f64 {
            break;
        }
        locus += gap as usize;
        hit(genome, locus, rng);
        events += 1;
        locus += 1;
        if locus >= len {
            break;
        }
    }
    events
}

/// Two-point crossover.
///
/// With probability `rate` two distinct cut points are drawn from `[1, L-1]`
/// and the segment between them is exchanged; otherwise the children are
/// copies of the parents. Parents of length 2 admit only one cut point and
/// exchange their tails.
pub fn crossover<G: Genome, R: Rng + ?Sized>(
    parent_a: &G,
    parent_b: &G,
    rate: f64,
    rng: &mut R,
) -> Result<(G, G)> {
    let len = check_parents(parent_a, parent_b)?;
    if !rng.gen_bool(rate.clamp(0.0, 1.0)) {
        return Ok((parent_a.clone(), parent_b.clone()));
    }
    let (lo, hi) = if len == 2 {
        (1, 2)
    } else {
        let first = rng.gen_range(1..len);
        let mut second = rng.gen_range(1..len - 1);
        if second >= first {
            second += 1;
        }
        (first.min(second), first.max(second))
    };
    crossover_at(parent_a, parent_b, lo, hi)
}

/// Exchange loci `lo..hi` between copies of the parents.
pub fn crossover_at<G: Genome>(parent_a: &G, parent_b: &G, lo: usize, hi: usize) -> Result<(G, G)> {
    let len = check_parents(parent_a, parent_b)?;
    if lo > hi || hi > len {
        return Err(Error::MalformedPopulation(format!(
            "cut points ({lo}, {hi}) out of range for length {len}"
        )));
    }
    let mut a = parent_a.clone();
    let mut b = parent_b.clone();
    for locus in lo..hi {
        a.swap_locus(&mut b, locus);
    }
    Ok((a, b))
}

fn check_parents<G: Genome>(a: &G, b: &G) -> Result<usize> {
    let (la, lb) = (a.locus_count(), b.locus_count());
    if la != lb {
        return Err(Error::MalformedPopulation(format!(
            "parent lengths differ: {la} vs {lb}"
        )));
    }
    if la < 2 {
        return Err(Error::MalformedPopulation(format!(
            "crossover needs at least 2 loci, got {la}"
        )));
    }
    Ok(la)
}

// ---------------------------------------------------------------------------
// Binary genomes

/// Genomes that are flat bit strings.
pub trait BitGenome: Genome {
    fn bit(&self, index: usize) -> bool;
    fn set_bit(&mut self, index: usize, value: bool);

    fn bits(&self) -> Vec<bool> {
        (0..self.locus_count()).map(|i| self.bit(i)).collect()
    }

    /// Lowercase hex of the bit string, most significant bit first. A final
    /// partial nibble is padded with zeros on the right.
    fn to_hex(&self) -> String {
        let bits = self.bits();
        bits.chunks(4)
            .map(|nibble| {
                let v = nibble
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (k, &b)| acc | (u32::from(b) << (3 - k)));
                char::from_digit(v, 16).expect("nibble")
            })
            .collect()
    }
}

macro_rules! impl_genome_for_bits {
    ($ty:ty) => {
        impl Genome for $ty {
            fn locus_count(&self) -> usize {
                <$ty>::bit_len(self)
            }

            fn swap_locus(&mut self, other: &mut Self, locus: usize) {
                let (x, y) = (self.bit(locus), other.bit(locus));
                if x != y {
                    self.set_bit(locus, y);
                    other.set_bit(locus, x);
                }
            }

            fn flip_locus<R: Rng + ?Sized>(&mut self, locus: usize, _rng: &mut R) {
                let v = self.bit(locus);
                self.set_bit(locus, !v);
            }

            fn randomize_locus<R: Rng + ?Sized>(&mut self, locus: usize, rng: &mut R) {
                let v: bool = rng.gen();
                self.set_bit(locus, v);
            }
        }
    };
}

fn parse_hex_bits(hex: &str, bit_len: usize) -> Result<Vec<bool>> {
    let expected = bit_len.div_ceil(4);
    if hex.len() != expected {
        return Err(Error::Parse(format!(
            "expected {expected} hex digits for {bit_len} bits, got {}",
            hex.len()
        )));
    }
    let mut bits = Vec::with_capacity(expected * 4);
    for c in hex.chars() {
        let v = c
            .to_digit(16)
            .filter(|_| !c.is_ascii_uppercase())
            .ok_or_else(|| Error::Parse(format!("invalid hex digit {c:?}")))?;
        for k in (0..4).rev() {
            bits.push(v >> k & 1 == 1);
        }
    }
    if bits[bit_len..].iter().any(|&b| b) {
        return Err(Error::Parse("non-zero padding bits".into()));
    }
    bits.truncate(bit_len);
    Ok(bits)
}

/// A free-standing bit sequence, for operator tests and fixtures.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        BitString(vec![true; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Parses strings of `0` and `1`, e.g. `"0110"`.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("invalid bit {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl BitGenome for BitString {
    fn bit(&self, index: usize) -> bool {
        self.0[index]
    }

    fn set_bit(&mut self, index: usize, value: bool) {
        self.0[index] = value;
    }
}

impl BitString {
    fn bit_len(&self) -> usize {
        self.0.len()
    }
}
impl_genome_for_bits!(BitString);

/// Genome with evolved bias direction and bias strength.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BiasGenotype {
    directions: BitVector32,
    strengths: [u8; GENE_COUNT],
}

impl BiasGenotype {
    pub fn new(directions: BitVector32, strengths: [u8; GENE_COUNT]) -> Self {
        BiasGenotype { directions, strengths }
    }

    /// Every strength gene set to the code nearest `strength`.
    pub fn uniform_strength(directions: BitVector32, strength: f64) -> Self {
        Self::new(directions, [encode_strength(strength); GENE_COUNT])
    }

    pub fn directions(&self) -> BitVector32 {
        self.directions
    }

    pub fn strength_codes(&self) -> &[u8; GENE_COUNT] {
        &self.strengths
    }

    pub fn strength(&self, gene: usize) -> f64 {
        decode_strength(self.strengths[gene])
    }

    pub fn strengths(&self) -> [f64; GENE_COUNT] {
        self.strengths.map(decode_strength)
    }

    pub fn from_hex(hex: &str) -> Result<Self> {
        let bits = parse_hex_bits(hex, FULL_GENOME_BITS)?;
        let mut g = BiasGenotype::new(BitVector32::zeros(), [0; GENE_COUNT]);
        for (i, b) in bits.into_iter().enumerate() {
            g.set_bit(i, b);
        }
        Ok(g)
    }

    fn bit_len(&self) -> usize {
        FULL_GENOME_BITS
    }
}

impl BitGenome for BiasGenotype {
    fn bit(&self, index: usize) -> bool {
        if index < GENE_COUNT {
            self.directions.get(index)
        } else {
            let k = index - GENE_COUNT;
            let shift = STRENGTH_CODE_BITS - 1 - k % STRENGTH_CODE_BITS;
            self.strengths[k / STRENGTH_CODE_BITS] >> shift & 1 == 1
        }
    }

    fn set_bit(&mut self, index: usize, value: bool) {
        if index < GENE_COUNT {
            self.directions.set(index, value);
        } else {
            let k = index - GENE_COUNT;
            let mask = 1u8 << (STRENGTH_CODE_BITS - 1 - k % STRENGTH_CODE_BITS);
            let code = &mut self.strengths[k / STRENGTH_CODE_BITS];
            if value {
                *code |= mask;
            } else {
                *code &= !mask;
            }
        }
    }
}
impl_genome_for_bits!(BiasGenotype);

/// Genome carrying only the bias directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DirectionOnlyGenotype {
    directions: BitVector32,
}

impl DirectionOnlyGenotype {
    pub fn new(directions: BitVector32) -> Self {
        DirectionOnlyGenotype { directions }
    }

    pub fn directions(&self) -> BitVector32 {
        self.directions
    }

    pub fn from_hex(hex: &str) -> Result<Self> {
        let bits = parse_hex_bits(hex, GENE_COUNT)?;
        Ok(DirectionOnlyGenotype::new(BitVector32::from_bools(&bits)?))
    }

    fn bit_len(&self) -> usize {
        GENE_COUNT
    }
}

impl BitGenome for DirectionOnlyGenotype {
    fn bit(&self, index: usize) -> bool {
        self.directions.get(index)
    }

    fn set_bit(&mut self, index: usize, value: bool) {
        self.directions.set(index, value);
    }
}
impl_genome_for_bits!(DirectionOnlyGenotype);

// ---------------------------------------------------------------------------
// Initialization

/// Strength bands for [`InitDistribution::SkewedStrong`]: `(low, high, probability)`.
pub const SKEWED_STRONG_BANDS: [(f64, f64, f64); 3] =
    [(0.9, 1.0, 0.75), (0.5, 0.9, 0.20), (0.0, 0.5, 0.05)];

/// Distribution of the first generation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitDistribution {
    /// Every genome bit is a fair coin.
    #[default]
    Uniform,
    /// Fair-coin directions; strengths skewed towards 1 by [`SKEWED_STRONG_BANDS`].
    SkewedStrong,
}

impl InitDistribution {
    /// Index into [`SKEWED_STRONG_BANDS`] of the band containing `strength`.
    /// Shared boundaries belong to the higher band.
    pub fn band_of(strength: f64) -> usize {
        SKEWED_STRONG_BANDS
            .iter()
            .position(|&(lo, _, _)| strength >= lo)
            .unwrap_or(SKEWED_STRONG_BANDS.len() - 1)
    }

    fn draw_strength_code<R: Rng + ?Sized>(self, rng: &mut R) -> u8 {
        match self {
            InitDistribution::Uniform => rng.gen(),
            InitDistribution::SkewedStrong => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut band = SKEWED_STRONG_BANDS[SKEWED_STRONG_BANDS.len() - 1];
                for b in SKEWED_STRONG_BANDS {
                    acc += b.2;
                    if u < acc {
                        band = b;
                        break;
                    }
                }
                let (lo, hi, _) = band;
                encode_strength(lo + (hi - lo) * rng.gen::<f64>())
            }
        }
    }
}

impl fmt::Display for InitDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitDistribution::Uniform => "uniform",
            InitDistribution::SkewedStrong => "skewed-strong",
        })
    }
}

impl FromStr for InitDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(InitDistribution::Uniform),
            "skewed-strong" | "skewed" => Ok(InitDistribution::SkewedStrong),
            _ => Err(Error::Parse(format!("unknown init distribution {s:?}"))),
        }
    }
}

/// Draw a first-generation genotype.
pub fn random_genotype<R: Rng + ?Sized>(dist: InitDistribution, rng: &mut R) -> BiasGenotype {
    let directions = BitVector32::new(rng.gen());
    let mut strengths = [0u8; GENE_COUNT];
    for code in &mut strengths {
        *code = dist.draw_strength_code(rng);
    }
    BiasGenotype::new(directions, strengths)
}

pub fn random_direction_only<R: Rng + ?Sized>(rng: &mut R) -> DirectionOnlyGenotype {
    DirectionOnlyGenotype::new(BitVector32::new(rng.gen()))
}

// ---------------------------------------------------------------------------
// Hinton–Nowlan genome

/// One switch gene: must open, must close, or free to learn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HnAllele {
    Zero,
    One,
    Question,
}

impl HnAllele {
    pub const ALL: [HnAllele; 3] = [HnAllele::Zero, HnAllele::One, HnAllele::Question];

    pub fn symbol(self) -> char {
        match self {
            HnAllele::Zero => '0',
            HnAllele::One => '1',
            HnAllele::Question => '?',
        }
    }

    /// Inverse CDF of the initial allele distribution (0.25, 0.25, 0.5).
    pub fn from_quantile(u: f64) -> Self {
        if u < 0.25 {
            HnAllele::Zero
        } else if u < 0.5 {
            HnAllele::One
        } else {
            HnAllele::Question
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HnGenotype {
    alleles: [HnAllele; HN_GENE_COUNT],
}

impl HnGenotype {
    pub fn new(alleles: [HnAllele; HN_GENE_COUNT]) -> Self {
        HnGenotype { alleles }
    }

    pub fn alleles(&self) -> &[HnAllele; HN_GENE_COUNT] {
        &self.alleles
    }

    pub fn count(&self, allele: HnAllele) -> usize {
        self.alleles.iter().filter(|&&a| a == allele).count()
    }

    /// A genotype with `ones` ONE alleles followed by `questions` QUESTION
    /// alleles and ZERO for the rest.
    pub fn with_counts(ones: usize, questions: usize) -> Result<Self> {
        if ones + questions > HN_GENE_COUNT {
            return Err(Error::InvalidGenotype(format!(
                "{ones} ones + {questions} questions exceeds {HN_GENE_COUNT} genes"
            )));
        }
        let mut alleles = [HnAllele::Zero; HN_GENE_COUNT];
        for (i, a) in alleles.iter_mut().enumerate() {
            if i < ones {
                *a = HnAllele::One;
            } else if i < ones + questions {
                *a = HnAllele::Question;
            }
        }
        Ok(HnGenotype::new(alleles))
    }
}

impl fmt::Display for HnGenotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.alleles.iter().try_for_each(|a| write!(f, "{}", a.symbol()))
    }
}

impl FromStr for HnGenotype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parsed = s
            .chars()
            .map(|c| match c {
                '0' => Ok(HnAllele::Zero),
                '1' => Ok(HnAllele::One),
                '?' => Ok(HnAllele::Question),
                _ => Err(Error::Parse(format!("invalid allele {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let alleles: [HnAllele; HN_GENE_COUNT] = parsed.try_into().map_err(|v: Vec<_>| {
            Error::InvalidGenotype(format!("expected {HN_GENE_COUNT} alleles, got {}", v.len()))
        })?;
        Ok(HnGenotype::new(alleles))
    }
}

impl Genome for HnGenotype {
    fn locus_count(&self) -> usize {
        HN_GENE_COUNT
    }

    fn swap_locus(&mut self, other: &mut Self, locus: usize) {
        std::mem::swap(&mut self.alleles[locus], &mut other.alleles[locus]);
    }

    fn flip_locus<R: Rng + ?Sized>(&mut self, locus: usize, rng: &mut R) {
        let current = self.alleles[locus];
        let others: Vec<HnAllele> = HnAllele::ALL.into_iter().filter(|&a| a != current).collect();
        self.alleles[locus] = others[rng.gen_range(0..others.len())];
    }

    fn randomize_locus<R: Rng + ?Sized>(&mut self, locus: usize, rng: &mut R) {
        self.alleles[locus] = HnAllele::ALL[rng.gen_range(0..HnAllele::ALL.len())];
    }
}

/// Draw a first-generation HN genotype: ZERO, ONE, QUESTION with
/// probabilities 0.25, 0.25, 0.5.
pub fn random_hn_genotype<R: Rng + ?Sized>(rng: &mut R) -> HnGenotype {
    let mut alleles = [HnAllele::Question; HN_GENE_COUNT];
    for a in &mut alleles {
        *a = HnAllele::from_quantile(rng.gen());
    }
    HnGenotype::new(alleles)
}

/// An HN genotype rewritten as direction/strength pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HnEmbedding {
    pub directions: [bool; HN_GENE_COUNT],
    pub strengths: [f64; HN_GENE_COUNT],
}

impl HnEmbedding {
    /// Apply the per-locus guess rule to a training vector.
    pub fn guess<R: Rng + ?Sized>(
        &self,
        train: &[bool; HN_GENE_COUNT],
        rng: &mut R,
    ) -> [bool; HN_GENE_COUNT] {
        let mut out = [false; HN_GENE_COUNT];
        for i in 0..HN_GENE_COUNT {
            out[i] = crate::concept::guess_locus(self.directions[i], self.strengths[i], train[i], rng);
        }
        out
    }
}

/// `0 ↦ (d=0, s=1)`, `1 ↦ (d=1, s=1)`, `? ↦ (coin, s=0)`.
pub fn hn_embed<R: Rng + ?Sized>(hn: &HnGenotype, rng: &mut R) -> HnEmbedding {
    let mut directions = [false; HN_GENE_COUNT];
    let mut strengths = [0.0; HN_GENE_COUNT];
    for (i, a) in hn.alleles.iter().enumerate() {
        match a {
            HnAllele::Zero => strengths[i] = 1.0,
            HnAllele::One => {
                directions[i] = true;
                strengths[i] = 1.0;
            }
            HnAllele::Question => directions[i] = rng.gen(),
        }
    }
    HnEmbedding { directions, strengths }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use proptest::prelude::*;
    use rand::RngCore;

    struct ConstantStream(u64);

    impl RngCore for ConstantStream {
        fn next_u32(&mut self) -> u32 {
            self.0 as u32
        }
        fn next_u64(&mut self) -> u64 {
            self.0
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            dest.fill(self.0 as u8)
        }
        fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
            self.fill_bytes(dest);
            Ok(())
        }
    }

    fn rng(i: u64) -> crate::rng::Stream {
        stream(7, Purpose::Sample, 0, i)
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_strength(0), 0.0);
        assert_eq!(decode_strength(255), 1.0);
        assert!((decode_strength(128) - 0.501_960_784).abs() < 1e-9);
        assert_eq!(encode_strength(decode_strength(128)), 128);
    }

    #[test]
    fn decode_is_monotone_and_surjective() {
        let values: Vec<f64> = (0..=255u8).map(decode_strength).collect();
        assert!(values.windows(2).all(|w| w[0] < w[1]));
        for code in 0..=255u8 {
            assert_eq!(encode_strength(decode_strength(code)), code);
        }
    }

    proptest! {
        #[test]
        fn encode_round_trip_within_half_code(s in 0.0f64..=1.0) {
            prop_assert!((decode_strength(encode_strength(s)) - s).abs() <= 1.0 / 510.0 + 1e-15);
        }

        #[test]
        fn crossover_conserves_locus_multisets(a in any::<u8>(), b in any::<u8>(), seed in any::<u64>()) {
            let to_bits = |x: u8| BitString((0..8).map(|k| x >> k & 1 == 1).collect());
            let (pa, pb) = (to_bits(a), to_bits(b));
            let mut r = stream(seed, Purpose::Sample, 0, 0);
            let (ca, cb) = crossover(&pa, &pb, 1.0, &mut r).unwrap();
            for i in 0..8 {
                let mut before = [pa.0[i], pb.0[i]];
                let mut after = [ca.0[i], cb.0[i]];
                before.sort();
                after.sort();
                prop_assert_eq!(before, after);
            }
        }

        #[test]
        fn bias_genotype_hex_round_trip(dirs in any::<u32>(), codes in any::<[u8; 32]>()) {
            let g = BiasGenotype::new(BitVector32::new(dirs), codes);
            let hex = g.to_hex();
            prop_assert_eq!(hex.len(), 72);
            prop_assert_eq!(BiasGenotype::from_hex(&hex).unwrap(), g);
        }
    }

    #[test]
    fn crossover_conserves_exhaustively_at_length_8() {
        let to_bits = |x: u32| BitString((0..8).map(|k| x >> k & 1 == 1).collect());
        for a in 0..256u32 {
            for b in (0..256u32).step_by(7) {
                let (pa, pb) = (to_bits(a), to_bits(b));
                for lo in 1..8 {
                    for hi in lo + 1..8 {
                        let (ca, cb) = crossover_at(&pa, &pb, lo, hi).unwrap();
                        for i in 0..8 {
                            assert_eq!(
                                u8::from(pa.0[i]) + u8::from(pb.0[i]),
                                u8::from(ca.0[i]) + u8::from(cb.0[i])
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn hex_layout_is_directions_then_codes_msb_first() {
        let mut codes = [0u8; 32];
        codes[0] = 0x80;
        codes[31] = 0x01;
        let g = BiasGenotype::new(BitVector32::new(1), codes);
        let hex = g.to_hex();
        assert_eq!(&hex[..8], "80000000");
        assert_eq!(&hex[8..10], "80");
        assert_eq!(&hex[70..], "01");
        assert_eq!(DirectionOnlyGenotype::new(BitVector32::new(0b11)).to_hex(), "c0000000");
    }

    #[test]
    fn hex_rejects_bad_input() {
        assert!(BiasGenotype::from_hex("00").is_err());
        assert!(DirectionOnlyGenotype::from_hex("0000000g").is_err());
        assert!(DirectionOnlyGenotype::from_hex("ABCDEF00").is_err());
    }

    #[test]
    fn uniform_init_mean_strength() {
        let mut r = rng(1);
        let mut total = 0.0;
        for _ in 0..10_000 {
            total += random_genotype(InitDistribution::Uniform, &mut r).strengths().iter().sum::<f64>();
        }
        let mean = total / (10_000.0 * 32.0);
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn uniform_init_direction_loci_pass_frequency_test() {
        let mut r = rng(2);
        let mut ones = [0u32; 32];
        let n = 10_000;
        for _ in 0..n {
            let d = random_genotype(InitDistribution::Uniform, &mut r).directions();
            for (i, c) in ones.iter_mut().enumerate() {
                *c += u32::from(d.get(i));
            }
        }
        let sigma = (0.25 / n as f64).sqrt();
        for c in ones {
            assert!((c as f64 / n as f64 - 0.5).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn skewed_init_matches_band_probabilities() {
        let mut r = rng(3);
        let (mut total, mut strong, mut count) = (0.0, 0usize, 0usize);
        for _ in 0..10_000 {
            for s in random_genotype(InitDistribution::SkewedStrong, &mut r).strengths() {
                total += s;
                strong += usize::from(s >= 0.9);
                count += 1;
            }
        }
        let mean = total / count as f64;
        assert!((mean - 0.86).abs() < 0.01, "{mean}");
        let frac = strong as f64 / count as f64;
        assert!((frac - 0.75).abs() < 0.02, "{frac}");
    }

    #[test]
    fn skewed_bands_are_a_partition() {
        let total: f64 = SKEWED_STRONG_BANDS.iter().map(|b| b.2).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(InitDistribution::band_of(1.0), 0);
        assert_eq!(InitDistribution::band_of(0.9), 0);
        assert_eq!(InitDistribution::band_of(0.5), 1);
        assert_eq!(InitDistribution::band_of(0.0), 2);
    }

    #[test]
    fn hn_initial_frequencies() {
        let mut r = rng(4);
        let mut counts = [0usize; 3];
        for _ in 0..10_000 {
            let g = random_hn_genotype(&mut r);
            for (k, a) in HnAllele::ALL.iter().enumerate() {
                counts[k] += g.count(*a);
            }
        }
        let n = 10_000.0 * 20.0;
        assert!((counts[0] as f64 / n - 0.25).abs() < 0.02);
        assert!((counts[1] as f64 / n - 0.25).abs() < 0.02);
        assert!((counts[2] as f64 / n - 0.5).abs() < 0.02);
    }

    #[test]
    fn hn_degenerate_stream_gives_all_zero() {
        let g = random_hn_genotype(&mut ConstantStream(0));
        assert_eq!(g.count(HnAllele::Zero), 20);
    }

    #[test]
    fn mutate_endpoints() {
        let mut r = rng(5);
        let original: BitString = "0110100111".parse().unwrap();
        let mut g = original.clone();
        assert_eq!(mutate(&mut g, 0.0, &mut r), 0);
        assert_eq!(g, original);
        assert_eq!(mutate(&mut g, 1.0, &mut r), 10);
        assert!(g.0.iter().zip(&original.0).all(|(a, b)| a != b));
    }

    #[test]
    fn mutate_mean_flip_count() {
        let mut r = rng(6);
        let mut g = BiasGenotype::new(BitVector32::zeros(), [0; 32]);
        let trials = 1_000_000;
        let mut flips = 0usize;
        for _ in 0..trials {
            flips += mutate(&mut g, 0.001, &mut r);
        }
        let mean = flips as f64 / trials as f64;
        assert!((mean - 0.288).abs() < 0.005, "{mean}");
        // Within 3 binomial standard deviations of N·r.
        let n = 288.0 * trials as f64;
        let sd = (n * 0.001 * 0.999).sqrt();
        assert!((flips as f64 - n * 0.001).abs() < 3.0 * sd);
    }

    #[test]
    fn mutate_actually_changes_bits() {
        let mut r = rng(8);
        let mut g = BitString::zeros(288);
        let flips = mutate(&mut g, 0.05, &mut r);
        assert_eq!(flips, g.0.iter().filter(|&&b| b).count());
    }

    #[test]
    fn resample_changes_half_as_often() {
        let mut r = rng(9);
        let trials = 200_000;
        let mut changed = 0usize;
        for _ in 0..trials {
            let mut g = DirectionOnlyGenotype::new(BitVector32::zeros());
            mutate_with(&mut g, 0.01, MutationKind::Resample, &mut r);
            changed += g.directions().count_ones() as usize;
        }
        let mean = changed as f64 / trials as f64;
        let sd = (32.0 * 0.005 * 0.995 / trials as f64).sqrt();
        assert!((mean - 0.16).abs() < 3.0 * sd, "{mean}");
    }

    #[test]
    fn crossover_examples() {
        let mut r = rng(10);
        let (a, b): (BitString, BitString) = ("0000".parse().unwrap(), "1111".parse().unwrap());
        let (ca, cb) = crossover_at(&a, &b, 1, 3).unwrap();
        assert_eq!(ca.to_string(), "0110");
        assert_eq!(cb.to_string(), "1001");

        let same: BitString = "10110".parse().unwrap();
        for _ in 0..20 {
            let (x, y) = crossover(&same, &same, 1.0, &mut r).unwrap();
            assert_eq!((&x, &y), (&same, &same));
        }
        for _ in 0..20 {
            let (x, y) = crossover(&a, &b, 0.0, &mut r).unwrap();
            assert_eq!((x, y), (a.clone(), b.clone()));
        }
    }

    #[test]
    fn crossover_cuts_are_distinct_and_interior() {
        let mut r = rng(11);
        let a = BitString::zeros(6);
        let b = BitString::ones(6);
        for _ in 0..500 {
            let (ca, _) = crossover(&a, &b, 1.0, &mut r).unwrap();
            let swapped: Vec<usize> = (0..6).filter(|&i| ca.0[i]).collect();
            assert!(!swapped.is_empty());
            assert!(!ca.0[0], "locus 0 precedes every cut point");
            assert!(swapped.windows(2).all(|w| w[1] == w[0] + 1), "contiguous segment");
        }
        let (x, y) = crossover(&BitString::zeros(2), &BitString::ones(2), 1.0, &mut r).unwrap();
        assert_eq!((x.to_string(), y.to_string()), ("01".into(), "10".into()));
    }

    #[test]
    fn crossover_length_mismatch_is_malformed() {
        let mut r = rng(12);
        let err = crossover(&BitString::zeros(4), &BitString::zeros(5), 0.6, &mut r).unwrap_err();
        assert!(matches!(err, Error::MalformedPopulation(_)));
        assert!(crossover(&BitString::zeros(1), &BitString::zeros(1), 0.6, &mut r).is_err());
    }

    #[test]
    fn hn_embedding() {
        let mut r = rng(13);
        let ones = HnGenotype::with_counts(20, 0).unwrap();
        let e = hn_embed(&ones, &mut r);
        assert!(e.directions.iter().all(|&d| d));
        assert!(e.strengths.iter().all(|&s| s == 1.0));

        let qs = HnGenotype::with_counts(0, 20).unwrap();
        assert!(hn_embed(&qs, &mut r).strengths.iter().all(|&s| s == 0.0));

        let mixed: HnGenotype = "01?01?01?01?01?01?01".parse().unwrap();
        let e = hn_embed(&mixed, &mut r);
        for (a, s) in mixed.alleles().iter().zip(e.strengths) {
            assert_eq!(s == 1.0, *a != HnAllele::Question);
        }
    }

    #[test]
    fn all_one_embedding_guesses_all_ones_without_noise() {
        let mut r = rng(14);
        let e = hn_embed(&HnGenotype::with_counts(20, 0).unwrap(), &mut r);
        // Without noise the training vector equals the all-ones target.
        let train = [true; HN_GENE_COUNT];
        for _ in 0..100 {
            assert_eq!(e.guess(&train, &mut r), [true; HN_GENE_COUNT]);
        }
    }

    #[test]
    fn hn_parse_and_counts() {
        let g: HnGenotype = "11111111111?????????".parse().unwrap();
        assert_eq!(g.count(HnAllele::One), 11);
        assert_eq!(g.count(HnAllele::Question), 9);
        assert_eq!(g.to_string(), "11111111111?????????");
        assert!("111".parse::<HnGenotype>().is_err());
        assert!(HnGenotype::with_counts(15, 6).is_err());
    }

    #[test]
    fn hn_flip_always_changes() {
        let mut r = rng(15);
        let mut g = HnGenotype::with_counts(5, 5).unwrap();
        for locus in 0..20 {
            let before = g.alleles()[locus];
            g.flip_locus(locus, &mut r);
            assert_ne!(before, g.alleles()[locus]);
        }
    }
}
