//! Slot-based simulator of C-V2X Mode 4 sidelink broadcast.
//!
//! The crate measures two flavours of Age of Information (AoI):
//!
//! - the in-queue age `φ` of packets waiting in each vehicle's four
//!   priority FIFO queues (HPD > DENM > CAM > MHD), and
//! - the receiver age `Φ(i→j)` that vehicle `j` holds about vehicle `i`,
//!   refreshed whenever a broadcast from `i` is decoded at `j`.
//!
//! Vehicles reserve radio resources with semi-persistent scheduling (SPS)
//! and the receiver decodes co-channel transmissions either orthogonally
//! (OMA, every other co-channel signal interferes) or with power-domain
//! successive interference cancellation (NOMA-SIC).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel sweeps live in the `cv2x-aoi` companion crate.
//!
//! ```
//! use cv2x_aoi_core::{config::ScenarioConfig, engine::run};
//!
//! let mut cfg = ScenarioConfig::default();
//! cfg.num_vehicles = 5;
//! cfg.sim_duration = 2_000;
//! let report = run(&cfg.validate().unwrap()).unwrap();
//! assert_eq!(report.slots.len(), 2_000);
//! ```

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod aoi;
pub mod config;
pub mod engine;
pub mod message;
pub mod mobility;
pub mod phy;
pub mod queues;
pub mod rng;
pub mod sps;
pub mod sweep;

pub use config::{AccessMode, ConfigError, ScenarioConfig, ValidatedConfig};
pub use engine::{run, Simulation, SimulationReport, Summary};
pub use message::MessageType;

/// Slot index. One slot is one 1 ms subframe.
pub type Slot = u64;

/// Vehicle identifier, `0..num_vehicles`.
pub type VehicleId = usize;
