use thiserror::Error;

pub type Result<T, E = DppError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DppError {
    #[error("ground set size {p} outside [1, {cap}]")]
    GroundSetSize { p: usize, cap: usize },

    #[error("configuration bitmask {mask:#x} has points outside a ground set of size {p}")]
    InvalidConfig { mask: u64, p: usize },

    #[error("columns are not orthonormal: Gram deviation {deviation:.3e} exceeds {tol:.0e}")]
    NotOrthonormal { deviation: f64, tol: f64 },

    #[error("rank {rank} exceeds ground set size {p}")]
    RankTooLarge { rank: usize, p: usize },

    #[error("spectrum entry {index} = {value} is outside [0, 1]")]
    SpectrumOutOfRange { index: usize, value: f64 },

    #[error("index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("enumeration over 2^{p} configurations refused (cap is {cap})")]
    EnumerationCap { p: usize, cap: usize },

    #[error("kernel has an eigenvalue equal to 1 (spectrum entry {index}); I - K is singular")]
    SingularKernel { index: usize },

    #[error("rank collapse while conditioning: expected {expected} basis vectors, found {found}")]
    RankCollapse { expected: usize, found: usize },

    #[error("input vectors are rank deficient (smallest singular value {smallest:.3e})")]
    RankDeficient { smallest: f64 },

    #[error("candidate family is empty: {0}")]
    EmptyFamily(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
