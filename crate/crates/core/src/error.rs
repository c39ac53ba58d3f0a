use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("expected {expected} settings per party, got alice={alice}, bob={bob}")]
    DimensionMismatch {
        expected: usize,
        alice: usize,
        bob: usize,
    },

    /// The optimized witness is already classical at the lower bracket end.
    #[error(
        "no violation at the lower end of the bracket ({parameter} = {at}, margin {margin:.3e})"
    )]
    NoViolationAtLo {
        parameter: &'static str,
        at: f64,
        margin: f64,
    },

    /// The optimized witness is still violated at the upper bracket end.
    #[error(
        "no transition inside the bracket ({parameter} = {at} still violates, margin {margin:.3e})"
    )]
    NoTransitionAtHi {
        parameter: &'static str,
        at: f64,
        margin: f64,
    },

    #[error("the pure state (p = 1) does not violate the witness (margin {margin:.3e})")]
    NoViolationAtPureState { margin: f64 },
}

impl Error {
    /// True for failures of a transition search, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoViolationAtLo { .. }
                | Error::NoTransitionAtHi { .. }
                | Error::NoViolationAtPureState { .. }
        )
    }
}
