use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("aliasing budget exceeded for {what}: tail mass {tail:.3e} > budget {budget:.1e}")]
    Aliasing { what: String, tail: f64, budget: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("v is not submultiplicative/even/>=1 at x = {x:?}, y = {y:?}: {detail}")]
    Submultiplicative { x: Vec<f64>, y: Vec<f64>, detail: String },

    #[error("matrix exponential overflow: ||tC||_2 = {norm:.3e}; use a smaller t or a windowed weight")]
    ExpOverflow { norm: f64 },

    #[error("derivative aliasing at alpha = {alpha:?}: spectral tail {tail:.3e}")]
    DerivativeAliasing { alpha: Vec<usize>, tail: f64 },

    #[error("missing derivative of order {0}")]
    MissingDerivative(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
