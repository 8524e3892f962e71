use core::fmt;

#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// Node count must be at least one.
    ZeroNodes,
    /// A radius or ratio was NaN or infinite where a finite value is needed.
    NonFinite(&'static str),
    /// Radii must satisfy `0 <= r2 < r1 <= 0.5`.
    InvalidRadii { r1: f64, r2: f64 },
    /// A position fell outside `[0, 1)`.
    PositionOutOfRange { index: usize, value: f64 },
    /// The dense adjacency representation is capped; use the counting module.
    CapExceeded { n: usize, cap: usize },
    /// Limit-theory quantities need `2 * r2 < r1`.
    RegimeViolation { r1: f64, r2: f64 },
    /// The standardisation divides by the square root of the covariance.
    NonpositiveSigma(f64),
    /// An edge refers to a missing node or joins a node to itself.
    InvalidEdge { i: usize, j: usize, n: usize },
    EmptySample,
    TooFewSamples { got: u64, min: u64 },
    GridTooCoarse { got: u32, min: u32 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroNodes => write!(f, "node count n must be at least 1"),
            Error::NonFinite(what) => write!(f, "{what} must be a finite number"),
            Error::InvalidRadii { r1, r2 } => write!(
                f,
                "invalid radii r1={r1}, r2={r2}: require 0 <= r2 < r1 <= 0.5 (r1 > r2)"
            ),
            Error::PositionOutOfRange { index, value } => {
                write!(f, "position {index} = {value} is outside [0, 1)")
            }
            Error::CapExceeded { n, cap } => write!(
                f,
                "n = {n} exceeds the dense adjacency cap of {cap}; use the arc-based counter"
            ),
            Error::RegimeViolation { r1, r2 } => write!(
                f,
                "r1={r1}, r2={r2} is outside the clustering regime: require 2*r2 < r1"
            ),
            Error::NonpositiveSigma(v) => write!(f, "covariance estimate {v} is not positive"),
            Error::InvalidEdge { i, j, n } => {
                write!(f, "edge ({i}, {j}) is not valid in a graph on {n} nodes")
            }
            Error::EmptySample => write!(f, "sample is empty"),
            Error::TooFewSamples { got, min } => {
                write!(f, "{got} Monte Carlo samples requested, at least {min} required")
            }
            Error::GridTooCoarse { got, min } => write!(f, "grid {got} is too coarse, at least {min} required"),
        }
    }
}

impl core::error::Error for Error {}
