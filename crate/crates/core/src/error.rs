use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("field has no positive mass to normalize")]
    ZeroField,

    #[error("node singularity at x = {x}, t = {t}: density {density:e} below floor {floor:e}")]
    NodeSingularity {
        x: f64,
        t: f64,
        density: f64,
        floor: f64,
    },

    #[error("unstable lattice step: alpha = {alpha} > 0.5, largest admissible dt = {max_dt:e}")]
    Unstable { alpha: f64, max_dt: f64 },

    #[error("trajectories {a} and {b} cross at t = {t}")]
    TrajectoryCrossing { a: usize, b: usize, t: f64 },
}

/// Checks `value > 0` (and finite), naming the offending field on failure.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
