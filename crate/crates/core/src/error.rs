use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A constructor or operation received a value outside its domain.
    InvalidParameter { name: &'static str, reason: &'static str },
    /// Adaptive quadrature ran out of subdivisions before meeting tolerance.
    QuadratureFailed { estimate: f64, abs_error: f64 },
    /// σ1² and σ0² are equal to within the guard; the slot carries no signal.
    DegenerateHypotheses { slot: usize },
    /// The squared threshold γ is negative, so H1 is never preferred.
    NegativeDiscriminant { slot: usize, gamma: f64 },
    /// A hypothesis variance is not strictly positive.
    NonPositiveVariance { slot: usize },
    /// Exhaustive allocation search would visit too many candidates.
    CombinatorialBudget { candidates: u128, limit: u128 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailed { .. }
                | Error::DegenerateHypotheses { .. }
                | Error::NegativeDiscriminant { .. }
                | Error::NonPositiveVariance { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::QuadratureFailed { estimate, abs_error } => {
                write!(f, "quadrature did not converge (estimate {estimate:e}, error {abs_error:e})")
            }
            Error::DegenerateHypotheses { slot } => {
                write!(f, "slot {slot}: H0 and H1 variances coincide")
            }
            Error::NegativeDiscriminant { slot, gamma } => {
                write!(f, "slot {slot}: squared threshold is negative ({gamma:e})")
            }
            Error::NonPositiveVariance { slot } => {
                write!(f, "slot {slot}: hypothesis variance is not positive")
            }
            Error::CombinatorialBudget { candidates, limit } => {
                write!(f, "exhaustive search needs {candidates} candidates (limit {limit})")
            }
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}
