use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("dimension must be 1 or 2, got {0}")]
    Dimension(usize),
    #[error("points per axis must be a power of two >= 16, got {0}")]
    PointsPerAxis(usize),
    #[error("grid of {points} points per axis exceeds the cap {cap} for dimension {dim}")]
    TooLarge { dim: usize, points: usize, cap: usize },
    #[error("box side must exceed 2, got {0}")]
    BoxSide(f64),
    #[error("field has {got} samples, grid expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field contains a non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("zero-padding factor must be >= 2, got {0}")]
    PadFactor(usize),
    #[error("malformed field document: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Error, PartialEq)]
pub enum WeightError {
    #[error("weight is not positive at t = {t} (value {value})")]
    NonPositive { t: f64, value: f64 },
    #[error("weight is not monotone on (0, 1]: w({t0}) = {w0}, w({t1}) = {w1}")]
    NonMonotone { t0: f64, w0: f64, t1: f64, w1: f64 },
    #[error("doubling ratio {ratio} at j = {j} exceeds the admissibility threshold")]
    DoublingUnbounded { j: u32, ratio: f64 },
    #[error("loglog weight needs b1 * b2 >= 0, got b1 = {b1}, b2 = {b2}")]
    MixedSigns { b1: f64, b2: f64 },
    #[error("J_max must be at least 8, got {0}")]
    DepthTooSmall(u32),
    #[error("unknown weight kind {0:?}")]
    UnknownKind(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum SymbolError {
    #[error("finite differences of symbol {name} are not finite at order {order}")]
    NonFinite { name: String, order: usize },
    #[error("unknown builtin symbol {0:?}")]
    Unknown(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum RatioError {
    #[error("denominator vanishes")]
    DivideByZero,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown inequality id {0:?}")]
    UnknownId(String),
    #[error("resolutions must be strictly ascending")]
    UnsortedResolutions,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("malformed report or config: {0}")]
    Parse(String),
}
