use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("closed-form model supports nonlinearity order k = 2 only, got k = {0}")]
    UnsupportedOrder(u32),

    #[error("truncation n_max = {n_max} too small: neglected probability mass {tail:.3e}")]
    InsufficientTruncation { n_max: usize, tail: f64 },

    #[error("truncation edge carries {edge_mass:.3e} of the state's weight (limit 1e-10)")]
    TruncationEdge { edge_mass: f64 },

    #[error("insensitive operating point: |slope| = {slope:.3e} is below the floor")]
    InsensitivePoint { slope: f64 },

    #[error("quantum Fisher information vanishes; the bound is uninformative")]
    Uninformative,

    #[error("empty grid")]
    EmptyGrid,

    #[error("degenerate domain [{lo}, {hi}]")]
    DegenerateDomain { lo: f64, hi: f64 },

    #[error("search found no informative point in the domain")]
    NoInformativePoint,
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {value}")))
    }
}
