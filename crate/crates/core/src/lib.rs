//! Evolution of learning bias.
//!
//! A laboratory for studying how evolution shifts the balance between
//! learning and instinct. Genomes carry a bias direction and a bias strength
//! for each case of a noisy Boolean concept; a genetic algorithm evolves them,
//! optionally under an externally forced strength trajectory. The Hinton–Nowlan
//! switch model is included for comparison, along with closed-form bias,
//! variance and expected-fitness analytics.
//!
//! | module | contents |
//! |---|---|
//! | [`genotype`] | genomes, initialization, crossover and mutation |
//! | [`concept`] | noisy concept task, guess model, fitness, HN lifetime fitness |
//! | [`ga`] | generational GA with stochastic universal sampling |
//! | [`trajectory`] | forced bias-strength schedules |
//! | [`appendix`] | statistical bias/variance of a single guess |
//! | [`experiments`] | canonical experiment definitions, CSV and summary output |

pub mod appendix;
pub mod concept;
pub mod error;
pub mod experiments;
pub mod ga;
pub mod genotype;
pub mod rng;
pub mod trajectory;

pub use concept::{BitVector32, FitnessScore, TaskSetup};
pub use error::{Error, Result};
pub use ga::{GaConfig, GenerationStats, GenomeKind, RunResult, RunSummary};
pub use genotype::{DirectionOnlyGenotype, HnAllele, HnGenotype, InitDistribution, BiasGenotype};
pub use trajectory::TrajectorySchedule;

// Guide chapters, compiled so their snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/genomes.md")]
    mod genomes {}
    #[doc = include_str!("../../../book/src/concept-task.md")]
    mod concept_task {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/trajectories.md")]
    mod trajectories {}
    #[doc = include_str!("../../../book/src/bias-variance.md")]
    mod bias_variance {}
    #[doc = include_str!("../../../book/src/switch-model.md")]
    mod switch_model {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
