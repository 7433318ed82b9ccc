//! Bias-strength schedules.
//!
//! A schedule either leaves strength to the genome (`Evolved`) or imposes one
//! strength on every gene of every individual in a generation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genotype::{DirectionOnlyGenotype, GENE_COUNT};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrajectorySchedule {
    #[default]
    Evolved,
    Fixed { strength: f64 },
    /// Linear from `start` at generation 1 to `end` at generation
    /// `generations`, then held at `end`.
    Ramp { start: f64, end: f64, generations: u32 },
    /// Same as `Fixed { strength: 0.0 }`.
    PureLearning,
    /// Same as `Fixed { strength: 1.0 }`.
    PureInstinct,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must be in [0, 1], got {v}")))
    }
}

impl TrajectorySchedule {
    pub fn fixed(strength: f64) -> Result<Self> {
        check_unit("fixed strength", strength)?;
        Ok(TrajectorySchedule::Fixed { strength })
    }

    pub fn ramp(start: f64, end: f64, generations: u32) -> Result<Self> {
        let s = TrajectorySchedule::Ramp { start, end, generations };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TrajectorySchedule::Fixed { strength } => check_unit("fixed strength", strength),
            TrajectorySchedule::Ramp { start, end, generations } => {
                check_unit("ramp start", start)?;
                check_unit("ramp end", end)?;
                if generations == 0 {
                    return Err(Error::InvalidConfig("ramp length must be at least 1".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_evolved(&self) -> bool {
        matches!(self, TrajectorySchedule::Evolved)
    }

    /// Imposed strength at a 1-based generation, or `None` when evolved.
    pub fn strength_at(&self, generation: u32) -> Option<f64> {
        match *self {
            TrajectorySchedule::Evolved => None,
            TrajectorySchedule::Fixed { strength } => Some(strength),
            TrajectorySchedule::PureLearning => Some(0.0),
            TrajectorySchedule::PureInstinct => Some(1.0),
            TrajectorySchedule::Ramp { start, end, generations } => {
                if generations <= 1 {
                    return Some(end);
                }
                let elapsed = f64::from(generation.saturating_sub(1));
                let frac = (elapsed / f64::from(generations - 1)).min(1.0);
                if frac >= 1.0 {
                    Some(end)
                } else {
                    Some(start + (end - start) * frac)
                }
            }
        }
    }

    /// Effective strength vector for a direction-only genotype.
    pub fn apply(&self, generation: u32, _genotype: &DirectionOnlyGenotype) -> Result<[f64; GENE_COUNT]> {
        self.strength_at(generation)
            .map(|s| [s; GENE_COUNT])
            .ok_or_else(|| Error::ContractViolation("an evolved schedule imposes no strength".into()))
    }
}

impl fmt::Display for TrajectorySchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrajectorySchedule::Evolved => f.write_str("evolved"),
            TrajectorySchedule::Fixed { strength } => write!(f, "fixed:{strength}"),
            TrajectorySchedule::Ramp { start, end, generations } => {
                write!(f, "ramp:{start}:{end}:{generations}")
            }
            TrajectorySchedule::PureLearning => f.write_str("pure-learning"),
            TrajectorySchedule::PureInstinct => f.write_str("pure-instinct"),
        }
    }
}

impl FromStr for TrajectorySchedule {
    type Err = Error;

    /// `evolved`, `fixed:0.75`, `ramp:0:1:5000`, `pure-learning`, `pure-instinct`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid schedule {s:?}"));
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["evolved"] => Ok(TrajectorySchedule::Evolved),
            ["pure-learning"] => Ok(TrajectorySchedule::PureLearning),
            ["pure-instinct"] => Ok(TrajectorySchedule::PureInstinct),
            ["fixed", v] => TrajectorySchedule::fixed(num(v)?),
            ["ramp", a, b, n] => {
                let n = n.trim().parse::<u32>().map_err(|_| bad())?;
                TrajectorySchedule::ramp(num(a)?, num(b)?, n)
            }
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::{guess_with, BitVector32};
    use crate::rng::{stream, Purpose};
    use proptest::prelude::*;

    #[test]
    fn ramp_endpoints() {
        let r = TrajectorySchedule::ramp(0.0, 1.0, 5000).unwrap();
        assert_eq!(r.strength_at(1), Some(0.0));
        assert_eq!(r.strength_at(5000), Some(1.0));
        assert_eq!(r.strength_at(9000), Some(1.0));
        let mid = r.strength_at(2500).unwrap();
        assert!((mid - 2499.0 / 4999.0).abs() < 1e-15);
        assert!((mid - 0.49990).abs() < 1e-5);
    }

    #[test]
    fn fixed_and_aliases() {
        let f = TrajectorySchedule::fixed(0.25).unwrap();
        for g in [1, 2, 777, 10_000] {
            assert_eq!(f.strength_at(g), Some(0.25));
            assert_eq!(TrajectorySchedule::PureLearning.strength_at(g), Some(0.0));
            assert_eq!(TrajectorySchedule::PureInstinct.strength_at(g), Some(1.0));
        }
        assert_eq!(TrajectorySchedule::Evolved.strength_at(3), None);
    }

    #[test]
    fn apply_requires_forced_schedule() {
        let g = DirectionOnlyGenotype::new(BitVector32::ones());
        assert!(TrajectorySchedule::Evolved.apply(1, &g).is_err());
        let v = TrajectorySchedule::ramp(0.0, 1.0, 5000).unwrap().apply(2500, &g).unwrap();
        assert!(v.iter().all(|&s| (s - 0.49990).abs() < 1e-5));
    }

    #[test]
    fn applied_endpoints_drive_the_guess_model() {
        let mut rng = stream(1, Purpose::Sample, 0, 0);
        let target = BitVector32::ones();
        let g = DirectionOnlyGenotype::new(target);
        let train = BitVector32::new(0x00ff_00ff);
        let ones = TrajectorySchedule::fixed(1.0).unwrap().apply(1, &g).unwrap();
        assert_eq!(guess_with(g.directions(), &ones, train, &mut rng), target);
        let zeros = TrajectorySchedule::fixed(0.0).unwrap().apply(1, &g).unwrap();
        assert_eq!(guess_with(g.directions(), &zeros, train, &mut rng), train);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["evolved", "fixed:0.75", "ramp:0:1:5000", "pure-learning", "pure-instinct"] {
            let parsed: TrajectorySchedule = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
        for bad in ["fixed", "fixed:1.5", "ramp:0:1:0", "ramp:0:1", "linear", "fixed:x"] {
            assert!(bad.parse::<TrajectorySchedule>().is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn ramp_is_monotone_and_bounded(
            start in 0.0f64..=1.0,
            end in 0.0f64..=1.0,
            len in 1u32..20_000,
            g in 1u32..30_000,
        ) {
            let r = TrajectorySchedule::ramp(start, end, len).unwrap();
            let a = r.strength_at(g).unwrap();
            let b = r.strength_at(g + 1).unwrap();
            let (lo, hi) = (start.min(end), start.max(end));
            prop_assert!(a >= lo - 1e-12 && a <= hi + 1e-12);
            if end >= start {
                prop_assert!(b >= a);
            }
        }
    }
}
