use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{0}, {1}]: start must be strictly below end")]
    InvalidInterval(f64, f64),

    #[error("point {s} lies outside the interval [{start}, {end}]")]
    OutsideDomain { s: f64, start: f64, end: f64 },

    #[error("point is outside the effective domain of the Lagrangian")]
    OutsideEffectiveDomain,

    #[error("both probes 1±h leave the effective domain (h = {0})")]
    DegenerateProbe(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible plan: slow-down set has measure {available:.6e}, need {required:.6e} (deficit {deficit:.6e})")]
    InfeasiblePlan {
        available: f64,
        required: f64,
        deficit: f64,
    },

    #[error("structure assumption violated: {0}")]
    Structure(String),

    #[error("time change construction failed: {0}")]
    Construction(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("unknown example `{0}`")]
    UnknownExample(String),
}

pub type Result<T> = std::result::Result<T, Error>;
