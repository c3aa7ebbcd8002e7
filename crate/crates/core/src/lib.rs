//! Discrete-time laboratory for joint communication/computation resource
//! splitting at a single base station with a co-located edge server.
//!
//! Mobile devices issue Bernoulli service requests and static sensors push
//! periodic environment updates; both flow through per-device FIFO queues,
//! an uplink shared under a bandwidth split, and two edge computation
//! queues shared under a compute split. Every completed request is scored
//! by two freshness metrics — its end-to-end delay and the age of the
//! sensor information available when it finished — and the crate provides
//! both an exhaustive fixed-split benchmark and a from-scratch PPO agent
//! that learns the split online from the two queue lengths alone.

pub mod aoi;
pub mod baseline;
pub mod config;
pub mod env;
pub mod ppo;
pub mod queueing;
pub mod radio;
pub mod traffic;

pub use config::{
    episode_seed, load_config, to_document, ConfigError, QueueLenUnit, RewardParams, RngHub,
    SimConfig, Step, StreamKind,
};
pub use env::{Action, Observation, SimEnv, StepOutcome};
pub use traffic::{ServiceUnit, SourceKind, UnitId};
