use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown symbol '{0}'")]
    UnknownSymbol(char),

    #[error("alphabet mismatch")]
    AlphabetMismatch,

    #[error("image of '{0}' is not positive")]
    NotPositive(char),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("generator does not extend: {0}")]
    MalformedGenerator(String),

    #[error("translation breaks sign purity: {0}")]
    InvalidTranslation(String),

    #[error("excluded point: {0}")]
    ExcludedPoint(String),

    #[error("prefix depth cap {0} exceeded")]
    DepthCap(usize),

    #[error("reducible permutation pair")]
    Reducible,

    #[error("length {0} is not positive")]
    NonPositiveLength(f64),

    #[error("point {x} outside [0, {total})")]
    OutOfRange { x: f64, total: f64 },

    #[error("connection: lengths of the last intervals coincide ({0} vs {1})")]
    Connection(f64, f64),

    #[error("matrix is not primitive")]
    NotPrimitive,

    #[error("power iteration did not converge (residual {0:e})")]
    NoConvergence(f64),
}
