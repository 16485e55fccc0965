use thiserror::Error;

/// Errors produced by the library.
///
/// Observation indices carried by violation variants are zero-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed CSV at line {line}, column {column}: {message}")]
    Csv {
        line: u64,
        column: usize,
        message: String,
    },

    #[error("data violate GARP (cycle {cycle:?})")]
    GarpViolation { cycle: Vec<usize> },

    #[error("data violate SARP (cycle {cycle:?})")]
    SarpViolation { cycle: Vec<usize> },

    #[error("data violate WGARP (pair {pair:?})")]
    WgarpViolation { pair: (usize, usize) },

    #[error("data violate WARP (pair {pair:?})")]
    WarpViolation { pair: (usize, usize) },

    #[error("data violate the law of demand (pair {pair:?})")]
    LawOfDemandViolation { pair: (usize, usize) },

    #[error("data violate the strong law of demand (cycle {cycle:?})")]
    StrongLawViolation { cycle: Vec<usize> },

    #[error("{patterns} sign patterns exceed the configured cap of {cap}")]
    PatternExplosion { patterns: u128, cap: u128 },

    #[error("search over {nodes} nodes exceeds the configured cap of {cap}")]
    SearchCap { nodes: u128, cap: u128 },

    #[error("new bundle costs {spent} at the new prices; expected 1")]
    Normalization { spent: f64 },

    #[error("LP solver failure: {message} (duality gap {gap:e})")]
    Solver { message: String, gap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
