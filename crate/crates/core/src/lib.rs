//! Conserved restricted solid-on-solid (CRSOS) surface model.
//!
//! A periodic one-dimensional interface whose neighbouring column heights
//! differ by at most one, evolving under particle-conserving hops of span one
//! and two. The crate provides four engines over the same rate catalog:
//!
//! * [`exact_master`]: the generator over the enumerated state space, the
//!   forward equation integrated adaptively, and one-site marginals.
//! * [`kmc`]: rejection-free kinetic Monte Carlo trajectories and ensembles.
//! * [`mean_field`]: the factorized one-site ODE system and its geometric
//!   stationary law.
//! * [`scaling`]: the continuum coefficient, the compactly supported
//!   self-similar profile and exponent fitting.
//!
//! Sites are indexed from 0 internally. Anything rendered for people uses
//! 1-based site numbers.

pub mod distribution;
pub mod error;
pub mod exact_master;
pub mod kmc;
pub mod lattice;
pub mod mean_field;
pub mod ode;
pub mod scaling;

pub use distribution::HeightDistribution;
pub use error::{Error, Result};
pub use lattice::{
    apply_move, enumerate_configs, is_restricted, list_moves, HeightConfig, MoveEvent,
    ProfileClass, RateTable, StateSpace,
};
