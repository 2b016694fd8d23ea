use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AlgError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("interval endpoint {0} is a root; perturb the endpoint")]
    EndpointIsRoot(String),
    #[error("empty interval: lower bound {lo} is not below upper bound {hi}")]
    EmptyInterval { lo: String, hi: String },
    #[error("zero polynomial has no isolated roots")]
    ZeroPolynomial,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SynthesisError {
    #[error("p must be nonconstant")]
    ConstantP,
    #[error("{name} must be {expected}")]
    Parity {
        name: &'static str,
        expected: &'static str,
    },
    #[error("r must be an integer >= 2, got {0}")]
    ExponentRange(i64),
    #[error("n must be a nonnegative integer, got {0}")]
    NegativeN(i64),
    #[error("reduction to the (p, q) family requires n = 0, got n = {0}")]
    NonzeroN(u32),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CertifyError {
    #[error("band does not match the polynomial: {0}")]
    BandMismatch(String),
    #[error(transparent)]
    Algebra(#[from] AlgError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StabilityError {
    #[error("band is not certified: {0}")]
    Uncertified(String),
    #[error("quadrature did not converge within {nodes} nodes (last error estimate {estimate:e})")]
    NoConvergence { nodes: usize, estimate: f64 },
    #[error("non-finite integrand value at tau = {0}")]
    NonFinite(f64),
    #[error("hyperbolicity margin {margin:e} does not exceed consistency residual {residual:e}")]
    MarginTooSmall { margin: f64, residual: f64 },
    #[error("sign of q' ({q_prime_sign}) disagrees with the integral sign ({value:e})")]
    SignLaw { q_prime_sign: i8, value: f64 },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DynamicsError {
    #[error("tau = {0} is outside the open band")]
    OutsideBand(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("step size underflow at t = {t} (state {x}, {y})")]
    StepUnderflow { t: f64, x: f64, y: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
    #[error("section coordinate must be positive, got {0}")]
    NonPositiveSection(f64),
    #[error("no return to the section within time {0}")]
    NoReturn(f64),
    #[error("orientation inconsistent with certification: {0}")]
    Orientation(String),
    #[error(transparent)]
    Stability(#[from] StabilityError),
}
