use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("message size must be at least one bit")]
    ZeroBits,
    #[error("energy constant `{0}` must be positive and finite")]
    NonPositiveConstant(&'static str),
    #[error("no optimal cluster count: base station at {uplink_distance} m is too close")]
    NoOptimum { uplink_distance: f64 },
}

/// One violated configuration invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{field}: expected {requirement}")]
pub struct ConfigViolation {
    pub field: &'static str,
    pub requirement: &'static str,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {}", list_violations(.0))]
    InvalidConfig(Vec<ConfigViolation>),
    #[error("network is dead: no alive nodes")]
    NetworkDead,
    #[error("fault script line {line}: {message}")]
    FaultScript { line: usize, message: String },
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

fn list_violations(v: &[ConfigViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
