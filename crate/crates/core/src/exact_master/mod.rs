//! Exact forward-equation solution over the enumerated state space.
//!
//! States are ordered as in [`StateSpace`](crate::lattice::StateSpace)
//! (lexicographic), and the ordering is stable across runs, so CSV row and
//! column indices refer to the same configurations every time.

mod evolve;
mod export;
mod generator;
mod marginal;

pub use evolve::{evolve_forward, evolve_forward_with, evolve_times, uniformization, StateDistribution};
pub use export::{write_distribution_csv, write_generator_csv, write_marginal_csv, write_states_csv};
pub use generator::{build_generator, GeneratorMatrix};
pub use marginal::{marginal_rate_identity, one_site_marginal, IdentityReport};
