//! Multi-cell network simulator with adaptive semantic communication.
//!
//! Wireless devices (WDs) extract task-relevant features from raw data on
//! device, trading CPU cycles against transmitted bits, and upload them to
//! base stations (BSs) over allocated resource blocks (RBs). The simulator
//! maximizes total utility by solving three nested problems:
//!
//! 1. **Per-WD scheduling** ([`sched`]): given a BS and an RB count, pick the
//!    compute workload, CPU frequency, transmit power, and data volume that
//!    maximize utility under delay and energy budgets.
//! 2. **Per-BS RB allocation** ([`alloc`]): split a BS's RBs among its
//!    associated WDs, greedily for concave utilities or by dynamic
//!    programming in general.
//! 3. **User association** ([`assoc`]): attach each WD to exactly one BS,
//!    starting from an everywhere-associated relaxation and detaching one WD
//!    per step.
//!
//! [`baselines`] provides five reference algorithms, [`oracle`] an exhaustive
//! solver for tiny instances, [`scenario`] seeded instance generation with a
//! JSON persistence format, and [`experiment`] a sweep harness with CSV
//! output.
//!
//! With the default `parallel` feature, utility-table construction, the
//! oracle's enumeration, and experiment cells run on rayon; disabling the
//! feature falls back to equivalent sequential loops with identical results.

pub mod alloc;
pub mod assoc;
pub mod baselines;
pub mod experiment;
pub mod model;
mod numopt;
pub mod oracle;
mod par;
pub mod scenario;
pub mod sched;
pub mod utility;

pub use model::{Assignment, BaseStation, Channel, GlobalParams, WirelessDevice};
pub use scenario::{GenConfig, Scenario};
pub use utility::{AccuracyParams, UtilityKind};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A value violated a type or operation precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// No feasible decision exists for the requested operation.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// An argument fell outside the domain of a numeric formula.
    #[error("out of domain: {0}")]
    Domain(String),
    /// Instance exceeds the exact solver's enumeration limits.
    #[error("instance too large for exact enumeration: {0}")]
    TooLarge(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    /// A persisted file declares a schema version this build does not read.
    #[error("unsupported schema version {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
