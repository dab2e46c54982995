use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u32, u32),
    #[error("cannot embed level {from} into level {to}")]
    LevelMismatch { from: u32, to: u32 },
    #[error("{0} is not coprime to {1}")]
    NotCoprime(i64, u64),
    #[error("coefficient vector has length {got}, expected {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid factor map: {0}")]
    InvalidMap(String),
    #[error("missing value for character {0:?}")]
    MissingCharacter(Vec<u64>),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("conductor p^{conductor} outside the admissible window ({low}, {high}]")]
    ConductorWindow { conductor: u32, low: u32, high: u32 },
    #[error("degenerate unit weight: {0}")]
    DegenerateUnit(String),
    #[error("incompatible truncation levels: {0}")]
    IncompatibleLevels(String),
    #[error("invalid invariants: {0}")]
    InvalidInvariants(String),
    #[error("{0} is a bad prime")]
    BadPrime(u64),
    #[error("no a_ell supplied for bad prime {0}")]
    MissingBadPrime(u64),
    #[error("non-minimal model at {0}")]
    NonMinimalModel(u64),
    #[error("invalid curve data: {0}")]
    InvalidCurve(String),
    #[error("rational reconstruction failed for <{a}/{q}> (sign {sign}): value {value:e}")]
    Reconstruction { a: i64, q: u64, sign: i8, value: f64 },
    #[error("could not determine the Fricke sign: {0}")]
    FrickeSign(String),
    #[error("invalid prime sequence: {0}")]
    InvalidSequence(String),
    #[error("invalid character: {0}")]
    InvalidCharacter(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
