use alloc::string::String;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter or input violates its documented invariant.
    #[error("invalid input `{field}`: {reason}")]
    Input { field: &'static str, reason: String },

    #[error("requested {requested} bound states but only {found} found")]
    TooFewBoundStates { requested: usize, found: usize },

    #[error("need at least {needed} levels, spectrum has {available}")]
    InsufficientLevels { needed: usize, available: usize },

    #[error("barrier index {beta} out of range ({available} barriers)")]
    BarrierOutOfRange { beta: usize, available: usize },

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("density of realisations is negative ({value}) at i = {at}")]
    NegativeDensity { at: f64, value: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn input(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Input { field, reason: reason.into() }
}
