//! Closed-form detection, error and capacity analysis of a diffusive
//! molecular communication link between two mobile nanomachines, plus a
//! Monte Carlo simulator that checks every closed form independently.
//!
//! The crate is `no_std` (it needs `alloc`). Everything is a pure function
//! of its inputs; the `molekom` crate adds configuration files, CSV output,
//! the command line and thread-parallel Monte Carlo drivers.
//!
//! Pipeline, bottom-up:
//!
//! * [`channel`] first-hitting-time density and per-slot arrival probabilities
//! * [`stats`] Gaussian moments of the received count under each hypothesis
//! * [`detector`] optimal per-slot threshold and decisions
//! * [`perf`] detection/false-alarm/error probabilities, mutual information, capacity
//! * [`allocation`] molecule budget allocation across slots
//! * [`mc`] slot-level and trajectory-level Monte Carlo

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod allocation;
pub mod channel;
pub mod detector;
mod error;
pub mod mc;
pub mod perf;
pub mod quad;
pub mod stats;

pub use channel::{ArrivalTable, ChannelParams, IndexOrigin};
pub use detector::{DecisionRule, Fallback, SlotThreshold};
pub use error::{Error, Result};
pub use perf::{Capacity, LinkPerformance, SlotPerformance};
pub use stats::{HypothesisMoments, NoiseParams, TxSchedule};
