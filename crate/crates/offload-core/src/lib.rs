//! Core algorithms for a time-slotted edge-cloud task offloading system.
//!
//! Each slot, every user device (UD) generates one task that can run locally,
//! on its home MEC server, or be forwarded from the server to a cloud. The
//! controller minimizes long-run UD energy subject to long-term queuing-delay
//! constraints at the servers, using a drift-plus-penalty surrogate: per slot
//! it greedily minimizes `V * energy + queue_pressure` where the queue
//! pressure is built from task queues (bits) and delay virtual queues (slots).
//!
//! The per-slot solver decouples into
//! - a closed-form bandwidth split over the offloading set (`allocation`),
//! - a many-to-one swap matching that picks the offloading set (`matching`),
//! - a 1-D convex relaxation plus dependent rounding that picks the
//!   edge/cloud split (`cloud_round`),
//! - a capacity sweep tying the two stages together (`orchestrator`).
//!
//! The crate is `no_std`-compatible (with `alloc`); all transcendental math
//! goes through `libm` so results are bit-identical across platforms. IO,
//! file formats and the CLI live in the companion `offload-sim` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod allocation;
pub mod channel;
pub mod cloud_round;
pub mod energy;
pub mod error;
pub mod matching;
pub mod mobility;
pub mod orchestrator;
pub mod queueing;
pub mod rng;
pub mod scenario;

pub use error::{ConfigError, ContractError};
pub use scenario::{Policy, SimConfig, World};
