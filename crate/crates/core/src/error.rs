//! Error type shared by the solver, scenario generator and harness.

use thiserror::Error;

/// Everything that can go wrong while building a scenario or solving it.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument that must be strictly positive was not.
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    /// A configuration field or combination of fields is invalid.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The uplink rate of a device is zero or non-finite, so no payload can
    /// ever be delivered.
    #[error("device {device}: uplink rate is zero or non-finite")]
    InfeasibleTransmission { device: usize },

    /// The PSNR floor requires a compression rate above the device's maximum.
    #[error(
        "device {device}: PSNR floor needs rho = {rho_required:.6} > rho_max = {rho_max:.6}"
    )]
    InfeasibleRho {
        device: usize,
        rho_required: f64,
        rho_max: f64,
    },

    /// A deadline at or below the device's minimum achievable round time.
    #[error("device {device}: deadline {deadline:.6e} s at or below floor {floor:.6e} s")]
    DeadlineInfeasible {
        device: usize,
        deadline: f64,
        floor: f64,
    },

    /// The deadline leaves no time for transmission after computation.
    #[error("device {device}: deadline exhausted, transmission slack {slack:.6e} s")]
    DeadlineExhausted { device: usize, slack: f64 },

    /// The weight configuration makes a subproblem degenerate.
    #[error("degenerate weights: {0}")]
    DegenerateWeights(&'static str),

    /// A device cannot reach its rate floor even at maximum power and the
    /// whole bandwidth budget.
    #[error(
        "device {device}: rate floor {rate_floor:.6e} bit/s unreachable (cap {rate_cap:.6e})"
    )]
    RateFloorUnreachable {
        device: usize,
        rate_floor: f64,
        rate_cap: f64,
    },

    /// The scenario itself admits no feasible allocation.
    #[error("scenario infeasible at device {device}: {detail}")]
    ScenarioInfeasible { device: usize, detail: String },

    /// A root bracket could not be established or monotonicity failed.
    #[error("bracketing failure: {0}")]
    Bracketing(String),

    /// An allocation violates the problem constraints.
    #[error("infeasible allocation: {0}")]
    InfeasibleAllocation(String),

    /// The brute-force oracle found no feasible grid point.
    #[error("no feasible grid point")]
    NoFeasibleGridPoint,

    /// Unknown metric or method name at an interface boundary.
    #[error("unknown name: {0}")]
    UnknownName(String),

    /// I/O failure, with the path for context.
    #[error("io error on {path}: {detail}")]
    Io { path: String, detail: String },

    /// CSV or JSON content that does not match the documented schema.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
