use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The bound-state scan reached one of its caps before the set closed.
    #[error("bound-state scan cap too small: member found at J = {j}, n = {n} (caps J <= {j_cap}, n <= {n_cap})")]
    CapTooSmall { j: u32, n: u32, j_cap: u32, n_cap: u32 },

    #[error("invalid binning: {0}")]
    InvalidBinning(String),

    #[error("inadmissible collision: energy gap {delta:e} < 0")]
    InadmissibleCollision { delta: f64 },

    #[error("degenerate collision pair: v = v*")]
    DegeneratePair,

    #[error("collision majorant violated: acceptance probability {probability} > 1")]
    MajorantViolation { probability: f64 },

    #[error("positivity lost in cell {cell}: {detail}")]
    Positivity { cell: usize, detail: String },

    #[error("state conversion failed: {0}")]
    Conversion(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
