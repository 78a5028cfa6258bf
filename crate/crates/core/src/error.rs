use thiserror::Error;

use crate::measurement::Side;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported matrix dimension {0} (only 2 and 4 are supported)")]
    UnsupportedDimension(usize),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error(
        "invalid mixture weights p1={p1}, p2={p2}, p3={p3}: need p1 > 0, p2, p3 >= 0, sum = 1"
    )]
    InvalidProbabilities { p1: f64, p2: f64, p3: f64 },

    #[error("alpha = {0} is outside (0, 1]")]
    AlphaOutOfRange(f64),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("index ({k}, {l}) is outside the profiles (lengths {alice_len}, {bob_len})")]
    IndexOutOfRange {
        k: usize,
        l: usize,
        alice_len: usize,
        bob_len: usize,
    },

    #[error("{side:?} profile is saturated at index {index}")]
    Saturated { side: Side, index: usize },

    #[error("correlator constant T11 + T22 = {0} is not positive; this initial state has no witnessing threshold")]
    UnsupportedFamily(f64),

    #[error("parameter regime violated: {0}")]
    Regime(String),

    #[error(
        "theta search exhausted after {halvings} halvings (smallest theta tried {smallest_theta:e}, last failure: {failure}); \
         a solution is guaranteed for epsilon >= 4 and L <= 2, so this indicates a bug or pathological parameters"
    )]
    SearchExhausted {
        halvings: u32,
        smallest_theta: f64,
        failure: String,
    },

    #[error("invalid scenario: {0}")]
    InvalidConfig(String),

    #[error("malformed report: {0}")]
    MalformedReport(String),
}
