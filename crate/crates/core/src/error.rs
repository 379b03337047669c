use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid root system {letter}{rank}: {constraint}")]
    InvalidType {
        letter: char,
        rank: usize,
        constraint: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },

    #[error("{0}")]
    InvalidPermutation(String),

    #[error(
        "permutation is not a diagram automorphism: A[{i}][{j}] = {a_ij} but A[{si}][{sj}] = {a_sisj} (1-based)"
    )]
    NotAutomorphism {
        i: usize,
        j: usize,
        si: usize,
        sj: usize,
        a_ij: i64,
        a_sisj: i64,
    },

    #[error("boundary selection is not a union of orbits: index {index} is selected but {missing} in its orbit is not (1-based)")]
    NotOrbitStable { index: usize, missing: usize },

    #[error("divisor coefficients are not constant on the orbit containing {i} and {j} (1-based)")]
    NotOrbitConstant { i: usize, j: usize },

    #[error("lambda is outside the interior of the effective cone: coefficient {index} (1-based) is {value}")]
    OutsideEffectiveInterior { index: usize, value: String },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("symmetric eigen iteration did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    EigenNotConverged { sweeps: usize, residual: f64 },

    #[error("series diverges at s = {s}: orbit {orbit} has s*lambda - kappa = {margin} <= 0")]
    Divergent { s: f64, orbit: usize, margin: f64 },

    #[error("s = {s} is not strictly right of the predicted pole a = {a}")]
    LeftOfPole { s: f64, a: f64 },

    #[error("work budget exceeded: estimated {estimate} operations, budget {budget}")]
    BudgetExceeded { estimate: u64, budget: u64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid count query: {0}")]
    InvalidQuery(String),

    #[error("fit rejected: {0}")]
    Fit(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Name of the module that raised the error, used in the CLI's error JSON.
    pub fn module(&self) -> &'static str {
        match self {
            Error::InvalidType { .. } => "root_system",
            Error::InvalidPermutation(_) | Error::NotAutomorphism { .. } => "diagram_action",
            Error::NotOrbitStable { .. }
            | Error::NotOrbitConstant { .. }
            | Error::OutsideEffectiveInterior { .. } => "wonderful_picard",
            Error::InvalidPoint(_) | Error::EigenNotConverged { .. } => "heights_pgln",
            Error::BudgetExceeded { .. } | Error::InvalidQuery(_) => "enumerator",
            Error::Divergent { .. } | Error::LeftOfPole { .. } => "local_zeta",
            Error::Fit(_) => "analysis",
            Error::Config(_) | Error::Unsupported(_) => "config",
            Error::DimensionMismatch { .. } | Error::IndexOutOfRange { .. } => "input",
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => "io",
        }
    }
}
