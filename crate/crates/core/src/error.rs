use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero has no factorization or squarefree part")]
    Zero,

    #[error("repeated root: x^3 + ({a})x^2 + ({b})x + ({c}) has zero discriminant")]
    RepeatedRoot { a: i64, b: i64, c: i64 },

    #[error("({u}, {v}) is not in Psi: F(u, v) = 0")]
    NotInPsi { u: i64, v: i64 },

    #[error("({u}, {v}) is not a reduced fraction with nonzero denominator")]
    NotReduced { u: i64, v: i64 },

    #[error("{t}^2 does not divide F({u}, {v})")]
    NotDivisible { u: i64, v: i64, t: u64 },

    #[error("invalid {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("invalid window {spec:?}: {reason}")]
    Window { spec: String, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by the run configuration rather than by the
    /// mathematics of a valid input.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::RepeatedRoot { .. } | Error::InvalidParam { .. } | Error::Window { .. }
        )
    }
}
