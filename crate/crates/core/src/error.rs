use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty point set")]
    EmptyPointSet,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("value {0} outside [0, 1)")]
    OutOfUnitInterval(f64),
    #[error("grid point {num}/{den} is invalid")]
    InvalidGridPoint { num: u64, den: u64 },
    #[error("negative argument: {0}")]
    NegativeArgument(f64),
    #[error("argument {0} outside [0, 1]")]
    OutOfClosedUnitInterval(f64),
    #[error("incompatible denominators {0} and {1}")]
    IncompatibleDenominators(u64, u64),
    #[error("denominator overflow while combining grids {0} and {1}")]
    DenominatorOverflow(u64, u64),
    #[error("sampled CDFs are on different grids")]
    GridMismatch,
    #[error("cardinality mismatch: {0} vs {1}")]
    CardinalityMismatch(usize, usize),
    #[error("empty stage schedule")]
    EmptySchedule,
    #[error("invalid stage schedule: {0}")]
    InvalidSchedule(String),
    #[error("index {n} outside 1..={max}")]
    IndexOutOfRange { n: u64, max: u64 },
    #[error("stage {k} outside 1..={max}")]
    StageOutOfRange { k: usize, max: usize },
    #[error("stage {stage} grid denominator exceeds 64-bit capacity")]
    ArithmeticOverflow { stage: usize },
    #[error("point {num}/{den} is not on the stage grid {grid}")]
    OffGrid { num: u64, den: u64, grid: u64 },
    #[error("swap intervals overlap at {0}")]
    OverlappingIntervals(u64),
    #[error("invalid swap pair: {0}")]
    InvalidSwapPair(String),
    #[error("prefix sizes must satisfy 1 <= M < N <= {len}, got M = {m}, N = {n}")]
    InvalidPrefixes { m: usize, n: usize, len: usize },
    #[error("moment order must be at least 1")]
    InvalidMomentOrder,
    #[error("moment undefined for coincident coarse points")]
    ZeroCoarseGap,
    #[error("point set is not exact")]
    NonExact,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
