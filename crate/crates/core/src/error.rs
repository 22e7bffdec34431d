use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate charge: r_minus = {0} must be positive")]
    DegenerateCharge(f64),
    #[error("horizon order: need r_minus < r_plus, got r_minus = {r_minus}, r_plus = {r_plus}")]
    HorizonOrder { r_plus: f64, r_minus: f64 },
    #[error("negative dilaton coupling a = {0}")]
    NegativeCoupling(f64),
    #[error("radius {r} is not outside the horizon r_plus = {r_plus}")]
    HorizonDomain { r: f64, r_plus: f64 },
    #[error("index out of range: {0}")]
    IndexRange(String),
    #[error("operator order {0} exceeds the composition budget of 4")]
    OrderOverflow(usize),
    #[error("principal part is singular (condition number {0:e})")]
    SingularPrincipalPart(f64),
    #[error("step size underflow at r = {r} (h = {h:e})")]
    StepFailure { r: f64, h: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
