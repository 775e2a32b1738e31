//! Error type shared by all modules of the crate.

use std::fmt;

/// Errors reported by parameter validation, series evaluation, the
/// coefficient recurrence, accessory-polynomial construction and solution
/// assembly.
#[derive(Debug, Clone, PartialEq)]
pub enum HeunError {
    /// The exponent parameters violate the Fuchsian condition
    /// 1 + alpha + beta = gamma + delta + epsilon beyond tolerance.
    FuchsianViolation { residual: f64 },
    /// The third finite singular point coincides with 0 or 1.
    SingularA { a: f64 },
    /// A parameter map produced a quadratic with negative discriminant for
    /// the individual exponents; only the product is then real.
    ComplexExponents { discriminant: f64 },
    /// The lower hypergeometric parameter sits on (or within 1e-9 of) a
    /// nonpositive integer and the series does not terminate first.
    PoleAtC { c: f64 },
    /// The hypergeometric series failed to meet tolerance within the term
    /// budget.
    NoConvergence { terms: usize },
    /// An argument lies outside the supported evaluation domain.
    DomainError { value: f64, context: &'static str },
    /// The recurrence coefficient formula divides by gamma0 - n = 0.
    DivisionByZero { n: i64 },
    /// A recurrence coefficient R_n vanished before termination, so this
    /// gamma0 choice cannot generate the expansion for these parameters.
    RecurrenceBreakdown { n: usize },
    /// The coefficient sequence failed to terminate at the expected index;
    /// the supplied accessory parameter is not a terminating value.
    NotTerminated { expected: usize },
    /// The operation requires an expansion built with gamma0 = alpha or
    /// beta, not gamma.
    WrongGamma0,
    /// An intermediate denominator of the continued fraction vanished.
    ZeroDenominator { depth: usize },
    /// The termination class condition does not hold for the requested
    /// gamma0 choice and order N.
    TerminationClassMismatch { class_residual: f64 },
    /// The adaptive integrator could not meet its local error tolerance.
    StepFailure { z: f64 },
    /// Invalid user input (CLI-level validation).
    InvalidInput(String),
}

impl fmt::Display for HeunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeunError::FuchsianViolation { residual } => {
                write!(f, "Fuchsian condition violated: |1+alpha+beta-(gamma+delta+epsilon)| = {residual:e}")
            }
            HeunError::SingularA { a } => {
                write!(f, "singular point location a = {a} coincides with 0 or 1")
            }
            HeunError::ComplexExponents { discriminant } => {
                write!(f, "exponent quadratic has negative discriminant {discriminant:e}; individual exponents are complex")
            }
            HeunError::PoleAtC { c } => {
                write!(f, "lower parameter c = {c} is at a nonpositive-integer pole of 2F1")
            }
            HeunError::NoConvergence { terms } => {
                write!(f, "hypergeometric series did not converge within {terms} terms")
            }
            HeunError::DomainError { value, context } => {
                write!(f, "argument {value} outside supported domain ({context})")
            }
            HeunError::DivisionByZero { n } => {
                write!(f, "recurrence coefficient undefined: gamma0 - n vanishes at n = {n}")
            }
            HeunError::RecurrenceBreakdown { n } => {
                write!(f, "recurrence breakdown: R_{n} vanished before termination")
            }
            HeunError::NotTerminated { expected } => {
                write!(f, "coefficient sequence did not terminate at N = {expected}")
            }
            HeunError::WrongGamma0 => {
                write!(f, "operation requires an expansion with gamma0 = alpha or beta")
            }
            HeunError::ZeroDenominator { depth } => {
                write!(f, "continued fraction denominator vanished at depth {depth}")
            }
            HeunError::TerminationClassMismatch { class_residual } => {
                write!(f, "termination class condition fails: residual {class_residual:e}")
            }
            HeunError::StepFailure { z } => {
                write!(f, "integrator step size underflow near z = {z}")
            }
            HeunError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

impl std::error::Error for HeunError {}

pub type Result<T> = std::result::Result<T, HeunError>;
