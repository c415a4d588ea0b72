use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid height configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid move {source_site}->{target_site}: {reason}")]
    InvalidMove {
        source_site: usize,
        target_site: usize,
        reason: String,
    },

    #[error("state space for n={n}, K={k} holds {count} configurations, above the cap of {cap}")]
    ResourceCap { n: usize, k: u64, count: u128, cap: u128 },

    #[error("rate table: {0}")]
    RateTable(String),

    #[error("site {site} out of range for a lattice of {n} sites")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("integration failed at t={t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("negative probability {value:e} at k={k}, t={t}")]
    Negativity { k: usize, t: f64, value: f64 },

    #[error("absorbing state reached at t={0}: no legal moves")]
    Absorbing(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Integration { .. } | Error::Negativity { .. } | Error::Domain(_)
        )
    }
}
