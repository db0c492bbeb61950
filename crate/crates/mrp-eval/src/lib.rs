//! Policy evaluation for discounted Markov reward processes.
//!
//! The crate models a finite Markov reward process, solves it exactly by
//! dense direct elimination, and estimates its value function from sampled
//! trajectories by five methods: temporal differencing with eligibility
//! traces, maximum-likelihood model building, Monte Carlo matrix inversion
//! (value estimates from terminating random walks), and the least-squares
//! generalizations of the last two for feature-compressed state spaces.
//! A general random-walk estimator for entries and rows of `(I - M)^{-1}`
//! backs the walk methods and is exposed directly.
//!
//! All randomness flows through [`rng::RngStream`]: ChaCha8 keyed by a
//! 64-bit seed and a 64-bit stream id, so every result is reproducible
//! bit for bit from its seeds.

pub mod error;
pub mod features;
pub mod generate;
pub mod inverse;
pub mod io;
pub mod lsmcmi;
pub mod lstd;
pub mod mcmi;
pub mod ml;
pub mod mrp;
pub mod oracle;
pub mod rng;
pub mod sample;
pub mod stats;
pub mod td;
pub mod value;
pub mod visited;

pub use error::{Error, Result};
pub use features::FeatureMap;
pub use generate::{procedural_mrp, random_mrp, ProceduralMrp};
pub use inverse::{default_split, estimate_entry, estimate_row, neumann_reference, run_walk, SplitMatrix};
pub use lsmcmi::{fit_weights, ls_mcmi_evaluate, LsMcmiOutcome};
pub use lstd::{lstd_evaluate, WeightVector};
pub use mcmi::{mcmi_evaluate, mcmi_single_state, mcmi_variance_pred, McmiOutcome};
pub use ml::{ml_value, MlModel};
pub use mrp::{Mrp, RewardModel, RewardNoise, TransitionMatrix};
pub use oracle::exact_value;
pub use rng::RngStream;
pub use sample::{sample_step, sample_stream, MrpSampler, SamplingStrategy, StepRecord};
pub use td::{td_lambda, AlphaSchedule, TdState};
pub use value::{rel_residual_error, ValueVector};
pub use visited::VisitedSet;

// The guide's code blocks run as doctests so the book can never drift
// from the library. Hidden behind cfg(doctest): the modules exist only
// while rustdoc collects tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/inverse.md")]
    mod inverse {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/least-squares.md")]
    mod least_squares {}
    #[doc = include_str!("../../../book/src/benchmarking.md")]
    mod benchmarking {}
}
