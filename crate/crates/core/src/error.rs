use thiserror::Error;

pub type Result<T> = std::result::Result<T, QrcError>;

#[derive(Debug, Error)]
pub enum QrcError {
    #[error("no simple {k}-regular graph on {n} vertices (need 1 <= k < n and n*k even)")]
    InfeasibleDegree { n: usize, k: usize },

    #[error("rejection sampling gave up after {attempts} attempts")]
    RetryExhausted { attempts: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("site {site} out of range for {n_qubits} qubits")]
    SiteOutOfRange { site: usize, n_qubits: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid subsystem: {0}")]
    InvalidSubsystem(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("eigensolver failed to converge")]
    EigenFailed,

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("classifier training data contains a single class")]
    SingleClass,

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("sweep aborted: {failed} of {total} realizations failed at grid point {grid_index}")]
    SweepAborted {
        grid_index: usize,
        failed: usize,
        total: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
