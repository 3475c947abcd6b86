use thiserror::Error;

use crate::expr::ParseError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown kernel family `{0}`")]
    UnknownFamily(String),
    #[error("m ≥ 2 required, got m = {0}")]
    Arity(usize),
    #[error("family `{family}` takes at most {max} parameter(s), got {got}")]
    ParamCount { family: String, max: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("kernel has not passed the homogeneity gate")]
    HomogeneityGate,
    #[error("homogeneity check: every sample evaluated to a non-finite value")]
    AllSamplesNonFinite,
    #[error("invalid exponent vector: {0}")]
    InvalidExponent(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("weight exponent {0} is outside [-1, 0]")]
    WeightExponent(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid generating function: {0}")]
    GeneratingFunction(String),
    #[error("invalid test function: {0}")]
    TestFunction(String),
    #[error("tail bound requires t ≥ e, got t = {0}")]
    TailBelowE(f64),
    #[error("tail bound requires a finite, positive Grand Lebesgue norm, got {0}")]
    TailNorm(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("sharpness ratio {ratio} exceeds target {target}: the quadrature is inconsistent")]
    SharpnessViolation { ratio: f64, target: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
