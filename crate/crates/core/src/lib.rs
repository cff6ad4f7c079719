//! Finite-memory almost-sure winning for limit-average objectives in
//! partially observable Markov decision processes.
//!
//! The crate provides:
//!  * a sparse POMDP / strategy model with validation ([`model`]);
//!  * exact product-chain analysis and strategy certification
//!    ([`chain`]);
//!  * the collapse construction that compresses a winning strategy to a
//!    bounded-memory one ([`collapse`]);
//!  * the decision procedure and strategy synthesis ([`solver`]);
//!  * a bounded brute-force oracle for cross-validation ([`oracle`]);
//!  * reductions from probabilistic-automaton emptiness problems
//!    ([`reductions`]);
//!  * a line-oriented text format ([`format`]), a seeded Monte Carlo
//!    simulator ([`sim`]), and built-in example models ([`fixtures`]).
//!
//! All quantitative types are generic over the scalar via the [`Real`]
//! trait, defaulting to `f64`; `f32` aliases are exported at the crate
//! root.

pub mod bits;
pub mod chain;
pub mod collapse;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod model;
pub mod num;
pub mod oracle;
pub mod reductions;
pub mod sim;
pub mod solver;

pub use bits::{Mask64, MASK_CAPACITY};
pub use chain::{
    certify_limavg1, certify_limavg_gt, product_chain, Certificate, MarkovChain,
    ProductChain, RecurrentClass, Witness,
};
pub use collapse::{collapsed_graph, collapsed_strategy, CollapsedGraph, MemoryAnnotation};
pub use error::{Error, Result};
pub use model::{
    belief_update, validate_pomdp, validate_strategy, Belief, Distribution,
    FiniteStrategy, Pomdp, Violation,
};
pub use num::Real;
pub use oracle::{bounded_oracle, OracleOutcome};
pub use reductions::{
    pfa_accept_prob, reduce_strict_emptiness, reduce_value1, word_to_strategy, Pfa,
};
pub use sim::{simulate, SimulationReport};
pub use solver::{
    almost_sure_reach_obs, build_belief_obs, prune_consistent, solve_limavg1,
    solve_limavg1_with, BeliefObsPomdp, SolveResult, SolveStats, SolverLimits,
};

/// Single-precision aliases for the main quantitative types.
pub type Pomdp32 = model::Pomdp<f32>;
pub type FiniteStrategy32 = model::FiniteStrategy<f32>;
pub type Distribution32 = model::Distribution<f32>;
pub type Certificate32 = chain::Certificate<f32>;
pub type SolveResult32 = solver::SolveResult<f32>;
