use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty symbol definition")]
    EmptyInput,
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("division by zero at x = {x}")]
    DivisionByZero { x: f64 },
    #[error("non-finite intermediate value at x = {x} in `{context}`")]
    NonFinite { x: f64, context: String },
    #[error("power is undefined at x = {x}: {base} ^ {exponent} needs a branch cut")]
    Domain {
        x: f64,
        base: String,
        exponent: String,
    },
    #[error("grid size {0} is not a power of two >= 8")]
    InvalidGrid(usize),
    #[error("grid is not symmetric under x -> -x")]
    AsymmetricGrid,
    #[error("samples live on a custom grid; a Cayley grid is required")]
    NotCayleyGrid,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite sample at node {0}")]
    NonFiniteSample(usize),
    #[error("symbol is not invertible on the grid: min |f| = {min:e} < floor {floor:e}")]
    NotInvertible { min: f64, floor: f64 },
    #[error("symbol is not unitary: max ||f| - 1| = {deviation:e} > {tol:e}")]
    NotUnitary { deviation: f64, tol: f64 },
    #[error("truncation size {n} needs {needed} coefficients, grid of {m} nodes provides {available}")]
    Budget {
        n: usize,
        m: usize,
        needed: usize,
        available: usize,
    },
    #[error("empty truncation schedule")]
    EmptySchedule,
    #[error("distance hypothesis violated: max |u - f| = {0}")]
    DistanceHypothesis(f64),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
