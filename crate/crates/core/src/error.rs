use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The gamma function was evaluated at zero or a negative integer.
    #[error("gamma function pole at x = {0}")]
    GammaPole(f64),

    /// The gamma function argument is large enough to overflow f64.
    #[error("gamma function overflows for x = {0} (limit 171.62)")]
    GammaOverflow(f64),

    /// A fractional power series was evaluated at a negative abscissa.
    #[error("fractional series requires x >= 0, got {0}")]
    NegativePoint(f64),

    /// A differentiation order that is not finite and positive.
    #[error("differentiation order must be finite and positive, got {0}")]
    InvalidOrder(f64),

    /// Expression text failed to parse. `offset` is a byte offset into the source.
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// Expression evaluation met a variable absent from the environment.
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    /// Division by zero during expression evaluation.
    #[error("division by zero")]
    DivisionByZero,

    /// Square root of a negative value during expression evaluation.
    #[error("square root of negative value {0}")]
    SqrtOfNegative(f64),

    /// The symbolic differentiator does not cover the requested form.
    #[error("cannot differentiate: {0}")]
    UnsupportedDerivative(String),

    /// A derivative order that is not present in the basis cache.
    #[error("derivative order {0} is not cached")]
    MissingOrder(f64),

    /// A problem definition violates one of its invariants.
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// A training configuration violates one of its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A line of a problem file could not be interpreted.
    #[error("problem file line {line}: {message}")]
    ProblemFile { line: usize, message: String },

    /// The damped normal equations are numerically singular.
    #[error("damped linear system is singular (pivot below 1e-300)")]
    SingularSystem,
}

pub type Result<T> = std::result::Result<T, Error>;
