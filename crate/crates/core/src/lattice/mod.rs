//! Periodic height configurations, the adjacency restriction, the move
//! catalog and the rate table every engine shares.

mod config;
mod moves;
mod rates;
mod space;

pub use config::{is_restricted, HeightConfig};
pub(crate) use config::is_restricted_u32;
pub use moves::{apply_move, list_moves, site_moves, Direction, MoveEvent, MovePattern, ProfileClass};
pub use rates::{Alias, DirectionalRates, RateTable, ALIASES, SKIP_PAIRS};
pub use space::{count_configs, enumerate_configs, state_cap, StateSpace, DEFAULT_STATE_CAP, STATE_CAP_ENV};
