use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    /// The estimate has (numerically) zero probability for the observed outcome,
    /// so its conditioned update cannot be normalized.
    #[error("degenerate estimate update: outcome {outcome} has estimate probability {prob:e}")]
    DegenerateUpdate { outcome: usize, prob: f64 },

    #[error("degenerate geometry: denominator {denominator:e} vanishes")]
    DegenerateGeometry { denominator: f64 },

    #[error("inconsistent coordinates: fidelity {fidelity} vs cos^2(theta_r) = {expected}")]
    InvalidCoordinates { fidelity: f64, expected: f64 },

    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid window [{start}, {end}]: {reason}")]
    InvalidWindow {
        start: f64,
        end: f64,
        reason: &'static str,
    },

    #[error("trajectory {index} failed: {source}")]
    Trajectory {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
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

pub(crate) fn unit_interval(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        })
    }
}
