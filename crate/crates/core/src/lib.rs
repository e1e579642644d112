//! Joint selection of billboard slots and advertisement tags.
//!
//! An instance pairs a trajectory database with billboards split into time
//! slots. A user who can see a selected slot is influenced by each selected tag
//! with a tag-dependent probability, and the objective `Φ(S, H)` is the expected
//! number of users influenced at least once. The crate builds instances from CSV
//! or synthetic data ([`ingest`]), evaluates `Φ` and its marginal gains
//! ([`influence`]), and maximizes it under cardinality budgets ([`solvers`],
//! [`baselines`]). [`experiment`] runs parameter sweeps over those solvers.

pub mod baselines;
pub mod domain;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod influence;
pub mod ingest;
pub mod solvers;

pub use domain::{
    validate_instance, InfluenceInstance, Selection, SlotId, TagId, UserId, Virtuals,
};
pub use error::{Error, Result};
pub use influence::{aggregated_influence, SurvivalState};
pub use solvers::{
    exhaustive_search, orthant_greedy, stochastic_greedy, GreedyMode, SolveResult, StochasticParams,
};
