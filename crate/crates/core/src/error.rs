use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unsupported graph family `{0}`")]
    UnsupportedFamily(String),
    #[error("code distance must be at least 2, got {0}")]
    DistanceTooSmall(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("noise level {0} is outside [0, 1]")]
    InvalidProbability(f64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SnowflakeError {
    #[error("window height {height} too small; need at least 2 sheets")]
    WindowTooSmall { height: usize },
    #[error("round sample has {got} top-sheet bits, template sheet has {expected}")]
    SheetSizeMismatch { got: usize, expected: usize },
    #[error("merging did not quiesce within {cap} timesteps (cycle {cycle}, {busy} nodes busy)")]
    MergingCap { cap: u64, cycle: u64, busy: usize },
    #[error("window still holds defects after {rounds} flush rounds")]
    FlushIncomplete { rounds: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AccountingError {
    #[error("rounds up to {requested} requested but only rounds before {finalized} are finalized")]
    NotFinalized { requested: i64, finalized: i64 },
    #[error("at least {needed} points required, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate fit input: {0}")]
    Degenerate(&'static str),
    #[error("block count must be positive")]
    NoBlocks,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Snowflake(#[from] SnowflakeError),
    #[error(transparent)]
    Accounting(#[from] AccountingError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
