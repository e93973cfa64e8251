use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("atom {index} sits at z = 0; the jump measure lives on R \\ {{0}}")]
    AtomAtZero { index: usize },
    #[error("atom {index} has non-positive or non-finite mass {mass}")]
    NonPositiveMass { index: usize, mass: f64 },
    #[error("second moment of the jump measure is not finite")]
    InfiniteSecondMoment,
    #[error("total mass of the jump measure is not finite; truncate small jumps first")]
    InfiniteTotalMass,
    #[error("moment of order {p} is not finite")]
    InfinitePMoment { p: f64 },
    #[error("invalid measure description: {0}")]
    InvalidMeasure(String),
    #[error("quadrature did not reach tolerance: {0}")]
    QuadratureFailure(String),

    #[error("partition size {m} exceeds the enumeration limit {limit}")]
    SizeLimitExceeded { m: usize, limit: usize },
    #[error("cumulant of order {0} is missing")]
    MissingCumulant(usize),
    #[error("second cumulant {0} is negative")]
    NegativeVariance(f64),
    #[error("step function has unbounded support")]
    UnboundedSupport,

    #[error("{what} extends beyond the simulation window [-{window}, {window}]")]
    WindowExceeded { what: String, window: f64 },
    #[error("invalid interval ({0}, {1}]")]
    InvalidInterval(f64, f64),

    #[error("coefficient {index} reads noise up to {horizon} but must be measurable at {left_end}")]
    HorizonViolation { index: usize, horizon: f64, left_end: f64 },
    #[error("breakpoints must be finite and strictly increasing")]
    NonIncreasingBreakpoints,
    #[error("coefficient {index} has no finite bound")]
    UnboundedCoefficient { index: usize },
    #[error("p = {0} must be an even integer >= 2")]
    OddMomentOrder(usize),
    #[error("kernel power integral diverges: {0}")]
    InfiniteNuT(String),

    #[error("invalid step kernel: {0}")]
    InvalidKernel(String),

    #[error("{0}")]
    ConfigParse(String),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),
    #[error("at least {min} samples required, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("all samples equal {value} but the target is {target}")]
    DegenerateVariance { value: f64, target: f64 },
    #[error("check `{check}`: {source}")]
    InCheck { check: String, source: Box<Error> },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
