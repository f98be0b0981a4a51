use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("squeezing parameter must be finite and non-negative, got {0}")]
    NegativeSqueezing(f64),
    #[error("transmissivity {0} outside [0, 1]")]
    Transmissivity(f64),
    #[error("mode index must be 1 or 2, got {0}")]
    InvalidMode(usize),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("covariance matrix is not in balanced two-mode form (deviation {0:e})")]
    NotBalanced(f64),
    #[error("channel is not a scalar multiple of the identity on the mode")]
    NonScalarChannel,
    #[error("both pumps blue-detuned is not a supported operating point")]
    BothPumpsBlue,
    #[error("operating point does not match the requested use: {0}")]
    OperatingPoint(&'static str),
    #[error("singular operating point, denominator {0:e}")]
    Singular(f64),
    #[error("invalid parameter {name} = {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error("cooperativity {name} = {value} exceeds device maximum {max}")]
    CooperativityBound { name: &'static str, value: f64, max: f64 },
    #[error("{0} source violates the stability criteria")]
    Unstable(&'static str),
    #[error("loss split product {product} does not match external transmissivity {expected}")]
    LossSplit { product: f64, expected: f64 },
    #[error("{0}")]
    Topology(String),
    #[error("cooperativities must be supplied for {0}")]
    MissingCooperativities(&'static str),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
