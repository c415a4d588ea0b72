//! Kinetic Monte Carlo for the CRSOS chain: Gillespie direct method over the
//! shared move catalog, with per-site rate caching.

mod ensemble;
mod seed;
mod simulate;
mod sumtree;
mod trajectory;

pub use ensemble::{ensemble, ensemble_range, Ensemble, EnsembleSummary, Estimate};
pub use seed::{log_grid, replica_seed};
pub use simulate::{simulate, ObservableSeries};
pub use trajectory::{kmc_step, KmcStep, TrajectoryState};
