//! Statistical bias, variance and squared error of a single guess.
//!
//! A guess `g` for one case is a Bernoulli variable. Its success probability
//! `μ = P(g = 1)` follows from the guess rule: the training label agrees with
//! the target with probability `1 - p`, and where it disagrees with the bias
//! direction the individual keeps its instinct with probability `s`. Every
//! quantity here is derived from that one `μ`:
//!
//! * statistical bias `E(g) - t = μ - t`
//! * variance `μ(1 - μ)`
//! * squared error `E((g - t)²) = P(g ≠ t) = bias² + variance`
//!
//! The tabulated polynomial forms are kept alongside as
//! [`statistical_bias_table`] and [`variance_table`] and cross-checked in tests.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::concept::guess_locus;

/// `P(g = 1)` for bias direction `d`, target `t`, strength `s`, noise `p`.
pub fn guess_mean(d: bool, t: bool, s: f64, p: f64) -> f64 {
    // Probability the training label equals 1.
    let alpha_one = if t { 1.0 - p } else { p };
    if d {
        // Guess 1 unless the label is 0 and observation wins.
        1.0 - (1.0 - alpha_one) * (1.0 - s)
    } else {
        alpha_one * (1.0 - s)
    }
}

pub fn statistical_bias(d: bool, t: bool, s: f64, p: f64) -> f64 {
    guess_mean(d, t, s, p) - f64::from(u8::from(t))
}

pub fn variance(d: bool, t: bool, s: f64, p: f64) -> f64 {
    let mu = guess_mean(d, t, s, p);
    mu * (1.0 - mu)
}

pub fn squared_error(d: bool, t: bool, s: f64, p: f64) -> f64 {
    statistical_bias(d, t, s, p).powi(2) + variance(d, t, s, p)
}

/// Statistical bias in the tabulated polynomial form.
pub fn statistical_bias_table(d: bool, t: bool, s: f64, p: f64) -> f64 {
    match (d, t) {
        (false, false) => (1.0 - s) * p,
        (false, true) => -(1.0 - s) * p - s,
        (true, false) => (1.0 - s) * p + s,
        (true, true) => -(1.0 - s) * p,
    }
}

/// Variance in the tabulated polynomial form.
pub fn variance_table(d: bool, t: bool, s: f64, p: f64) -> f64 {
    let shared = p * (1.0 - p) + s * p * (1.0 - s * p);
    if d == t {
        shared - 2.0 * s * p * (1.0 - p)
    } else {
        shared + s * (1.0 - s) - 2.0 * s * p * (2.0 - p - s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuessStatistics {
    pub mean: f64,
    pub statistical_bias: f64,
    pub variance: f64,
    pub squared_error: f64,
}

impl GuessStatistics {
    pub fn closed_form(d: bool, t: bool, s: f64, p: f64) -> Self {
        GuessStatistics {
            mean: guess_mean(d, t, s, p),
            statistical_bias: statistical_bias(d, t, s, p),
            variance: variance(d, t, s, p),
            squared_error: squared_error(d, t, s, p),
        }
    }
}

/// Empirical guess statistics with standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloGuessStats {
    pub samples: u64,
    pub estimate: GuessStatistics,
    /// Standard error of the mean, and so of the statistical bias.
    pub mean_se: f64,
    /// Delta-method standard error of `m(1 - m)`, plus the second-order term
    /// `se²` that dominates when `m` is near 1/2.
    pub variance_se: f64,
    pub squared_error_se: f64,
}

impl MonteCarloGuessStats {
    /// True when every empirical statistic is within `z` standard errors of
    /// the closed form.
    pub fn agrees_with(&self, exact: &GuessStatistics, z: f64) -> bool {
        let within = |est: f64, truth: f64, se: f64| (est - truth).abs() <= z * se + 1e-15;
        within(self.estimate.statistical_bias, exact.statistical_bias, self.mean_se)
            && within(self.estimate.variance, exact.variance, self.variance_se)
            && within(self.estimate.squared_error, exact.squared_error, self.squared_error_se)
    }
}

/// Simulate the single-case pipeline `samples` times: a training label drawn
/// from the target with flip probability `p`, then a guess from `(d, s)`.
pub fn monte_carlo_guess_stats<R: Rng + ?Sized>(
    d: bool,
    t: bool,
    s: f64,
    p: f64,
    samples: u64,
    rng: &mut R,
) -> MonteCarloGuessStats {
    let samples = samples.max(1);
    let mut ones = 0u64;
    let mut errors = 0u64;
    for _ in 0..samples {
        let alpha = t ^ rng.gen_bool(p);
        let g = guess_locus(d, s, alpha, rng);
        ones += u64::from(g);
        errors += u64::from(g != t);
    }
    let n = samples as f64;
    let m = ones as f64 / n;
    let e = errors as f64 / n;
    let mean_se = (m * (1.0 - m) / n).sqrt();
    MonteCarloGuessStats {
        samples,
        estimate: GuessStatistics {
            mean: m,
            statistical_bias: m - f64::from(u8::from(t)),
            variance: m * (1.0 - m),
            squared_error: e,
        },
        mean_se,
        variance_se: (1.0 - 2.0 * m).abs() * mean_se + 3.0 * mean_se * mean_se,
        squared_error_se: (e * (1.0 - e) / n).sqrt(),
    }
}
