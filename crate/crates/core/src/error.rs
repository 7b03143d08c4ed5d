use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A cloner with unit transmission has no finite variance; the caller has
    /// to take the analytic limit instead.
    #[error("cloner variance is undefined at unit transmission (excess noise {xi}); use the unit-transmission limit")]
    ClonerLimit { xi: f64 },

    #[error("quadratic form is not positive definite (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("non-finite Fock coefficient at index ({n1}, {n2})")]
    Overflow { n1: usize, n2: usize },

    #[error("conditional state for S = {s}, m = {m} has vanishing trace {trace}")]
    Underflow { s: f64, m: f64, trace: f64 },

    #[error("eigenvalue {0} is below the negativity tolerance")]
    NegativeEigenvalue(f64),

    #[error("probability {0} outside [0, 1]")]
    Domain(f64),

    #[error("the direct-integration quadratic form requires detector transmission < 1 (got {0})")]
    UnitDetectorTransmission(f64),

    #[error("outcome slice |m| = 0 carries no key")]
    ZeroSlice,

    #[error("infeasible noise split: channel excess noise {xi1} < 0")]
    InfeasibleSplit { xi1: f64 },

    #[error("empty photon-number grid")]
    EmptyGrid,

    #[error("slice states for ρ⁰ and ρ¹ disagree in entropy: {0} vs {1}")]
    ParityMismatch(f64, f64),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}
