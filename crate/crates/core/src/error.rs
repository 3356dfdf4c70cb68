use thiserror::Error;

/// Errors raised by the arithmetic and verification layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("invalid field parameters: {0}")]
    InvalidField(String),
    #[error("no (q-1)-st root in the residue field; enlarge s")]
    NoRootInField,
    #[error("division by zero")]
    DivideByZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("ramification needed: raise m to a multiple of {required_m}")]
    Ramification { required_m: u32 },
    #[error("residual equation does not split over the residue field (found {found} of {needed} roots); enlarge s")]
    ResidueSplitting { found: usize, needed: usize },
    #[error("Gauss norm indeterminate at current precision")]
    IndeterminateNorm,
    #[error("evaluation at a pole (t = theta^(q^{0}))")]
    EvalAtPole(u32),
    #[error("series tail is not negligible: {0}")]
    TailNotNegligible(String),
    #[error("pole of order {0} at t = theta")]
    HigherOrderPole(u32),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("argument outside the convergence radius: deg = {deg}, log_q R = {radius}")]
    OutsideRadius { deg: String, radius: String },
    #[error("compatibility precondition failed for i = {0:?}")]
    CompatPreconditionFailed(Vec<usize>),
    #[error("gate failed: deg j(phi) = {deg} is not < q^2 = {bound}")]
    GateFailed { deg: String, bound: u64 },
    #[error("routes disagree at index {0}")]
    RouteMismatch(usize),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures that name a parameter (m, s, radius, gate) the caller must change.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::NoRootInField
                | Error::Ramification { .. }
                | Error::ResidueSplitting { .. }
                | Error::OutsideRadius { .. }
                | Error::CompatPreconditionFailed(_)
                | Error::GateFailed { .. }
                | Error::TailNotNegligible(_)
                | Error::PrecisionExhausted(_)
                | Error::NoConvergence(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
