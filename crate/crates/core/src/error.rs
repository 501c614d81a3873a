use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator length mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("qubit {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("operators are capped at 64 qubits, requested {0}")]
    CapacityExceeded(usize),
    #[error("operator carries a +/-i phase and has no +/-1 sign")]
    NonHermitian,
    #[error("invalid pauli string {0:?}")]
    ParsePauli(String),
    #[error("invalid check matrix: {0}")]
    InvalidCode(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("enumeration budget exceeded: {candidates} candidates over budget {budget}")]
    BudgetExceeded { candidates: u128, budget: u128 },
    #[error("unknown block {0:?}")]
    UnknownBlock(String),
    #[error("leg {0} is not an open leg")]
    LegNotOpen(String),
    #[error("degenerate contraction: -I is derivable, the network state vanishes")]
    DegenerateContraction,
    #[error("invalid logical assignment: {0}")]
    InvalidAssignment(String),
    #[error("network is not fully resolved: {0}")]
    NotResolved(String),
    #[error("gate {0} is not supported by this engine")]
    UnsupportedGate(String),
    #[error("engine capacity exceeded: {qubits} qubits over cap {cap}")]
    EngineCapacity { qubits: usize, cap: usize },
    #[error("routing failed: {0}")]
    Routing(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("fidelity model not identifiable: {0}")]
    Identifiability(String),
    #[error("no shot records")]
    EmptyRecords,
    #[error("backend {backend} rejected the job: {reason}")]
    Rejected { backend: String, reason: String },
    #[error("unknown job {0}")]
    UnknownJob(String),
    #[error("integrity failure: {0}")]
    Integrity(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
