use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator on {spins} spins exceeds the {max}-spin limit")]
    TooManySpins { spins: usize, max: usize },

    #[error("invalid site index {site} for a {spins}-spin operator")]
    InvalidSite { site: usize, spins: usize },

    #[error("bloch vector has length {0}, outside the unit ball")]
    OutsideBlochBall(f64),

    #[error("operator contains a non-finite entry")]
    NonFinite,

    #[error("operator is not hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("gapless elimination: smallest eigenvalue magnitude {0:e} on the decaying manifold")]
    GaplessElimination(f64),

    #[error("rate must be non-negative, got {0}")]
    NegativeRate(f64),

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("no transition bracketed in the scanned range")]
    NoTransition,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error("resource cap: {0}")]
    ResourceCap(String),

    #[error("eigensolver did not converge")]
    Eigensolver,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
