//! Optimal harvest-then-transmit resource allocation for wireless powered
//! communication networks with non-ideal circuit power.
//!
//! A base station broadcasts RF energy for a fraction `tau_0` of every
//! fading epoch; each energy-harvesting user then spends what it collected,
//! plus a fixed circuit power while active, in its own TDMA uplink slot
//! `tau_k`. This crate provides
//!
//! * the closed-form per-epoch allocation for proportional-fair and
//!   max-sum-rate objectives ([`allocator`]),
//! * the online protocol that learns the power price and rate weights
//!   ([`protocol`]),
//! * Rayleigh block-fading channel generation ([`channel`]),
//! * brute-force oracles for auditing the closed form ([`oracle`]),
//! * experiment drivers for the circuit-power and power-budget sweeps
//!   ([`experiment`], [`plot`]).

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod allocator;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod oracle;
pub mod plot;
pub mod protocol;
pub mod special;
pub mod verify;

pub use allocator::{
    allocate_epoch, allocate_epoch_maxsum, solve_beta, solve_z, verify_kkt, AllocatorWorkspace,
    EpochAllocation, KktReport,
};
pub use channel::{mean_gain, sample_epoch, ChannelModel, ChannelState, NetworkConfig};
pub use error::{Error, Result};
pub use metrics::jain_index;
pub use protocol::{
    calibrate_lambda_offline, compute_metrics, run, step, Metrics, Mode, ProtocolState,
    SimulationResult, StepRule,
};
pub use special::{find_root_decreasing, lambert_w0};
