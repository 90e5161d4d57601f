use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("a scenario needs at least 2 miners, got {0}")]
    TooFewMiners(usize),

    #[error("duplicate miner id `{0}`")]
    DuplicateMinerId(String),

    #[error(
        "DegenerateDenominator: αH² + R(H) − H·R′(H) = {denominator:e} ≤ 0 at H = {total_hash:e}"
    )]
    DegenerateDenominator { total_hash: f64, denominator: f64 },

    #[error("NoBracket: aggregate excess Σh(H) − H has no sign change on [{lo:e}, {hi:e}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("NoBracket: aggregate excess has {} roots ({roots:?}); equilibrium is not unique", roots.len())]
    MultipleRoots { roots: Vec<f64> },

    #[error("NoConvergence: no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error(
        "best response of miner {miner} is {hash_rate:e}, above the hash-rate bound {h_max:e}"
    )]
    AboveBound {
        miner: String,
        hash_rate: f64,
        h_max: f64,
    },

    #[error("first-order residual {residual:e} of miner {miner} exceeds tolerance {tolerance:e}")]
    FocResidual {
        miner: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("objective is not strictly concave at h = {hash_rate:e} (curvature {curvature:e})")]
    NotConcave { hash_rate: f64, curvature: f64 },

    #[error("AllZero: every weight is zero, distribution is undefined")]
    AllZero,

    #[error("NotLinearReward: the decomposition bound requires a linear reward R(H) = ρH")]
    NotLinearReward,

    #[error("MixtureMismatch: miner {miner} hash rate deviates from β + ρ/α by {deviation:e}")]
    MixtureMismatch { miner: String, deviation: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
