//! Solver library for jointly allocating transmission power, bandwidth,
//! device CPU frequency, base-station CPU frequency and semantic compression
//! rate across the training rounds of an uplink image semantic-communication
//! network.
//!
//! The objective is a weighted sum of the slowest device's round time and the
//! total energy spent, subject to a reconstruction-quality (PSNR) floor per
//! device. The solver alternates two blocks:
//!
//! * [`p3`] — frequencies, compression rates and the common deadline, solved
//!   in closed form from the KKT cases plus one outer bisection;
//! * [`p4`] — power and bandwidth, a sum of concave-over-convex energy
//!   ratios, solved through a parametric reformulation refined by a modified
//!   Newton iteration.
//!
//! [`scenario`] builds seeded, reproducible problem instances; [`baselines`]
//! provides the four comparison policies; [`oracle`] holds brute-force and
//! KKT-residual verification machinery; [`sweep`] reproduces the experiment
//! campaign (CSV tables and SVG plots).

pub mod baselines;
pub mod error;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod p3;
pub mod p4;
mod rootfind;
pub mod scenario;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{Allocation, ConsumptionReport, DeviceProfile, PsnrModel, SystemParams};
pub use optimizer::{OptimizerConfig, SolveTrace};
pub use scenario::{sample_scenario, Scenario, ScenarioConfig};
