//! # roadguard-core
//!
//! A deterministic discrete-time simulator of an in-vehicle collision
//! detection and rescue-alert system, built from small composable pieces:
//!
//! - [`world`] — single-lane kinematics plus the simulated sensors: forward
//!   ultrasonic ranging, a two-level vibration signal, and a GPS fix mapped
//!   from lane coordinates.
//! - [`controller`] — the per-vehicle alert state machine: four proximity
//!   zones driving green/yellow/red LEDs and a buzzer, a 30-second
//!   vibration-triggered acknowledgment window (blue LED), and the one-shot
//!   escalation sequence when the driver never presses the button.
//! - [`v2v`] — range-limited lossless broadcast between equipped vehicles.
//! - [`dispatch`] — the cloud side: a responder registry and
//!   nearest-hospital/police/insurer resolution for collision reports.
//! - [`sms`] — a stub GSM gateway fanning family alerts into an outbox.
//! - [`scenario`], [`runner`], [`event_log`], [`summary`] — declarative
//!   scenario files, the tick loop that wires everything together, and the
//!   replayable key=value event log it produces.
//!
//! Identical scenarios always produce byte-identical logs: all iteration is
//! over ordered maps, the tick pipeline order is fixed, and log records are
//! kept sorted by `(tick, vehicle, kind)`.

pub mod controller;
pub mod dispatch;
pub mod event_log;
pub mod geo;
pub mod runner;
pub mod scenario;
pub mod sms;
pub mod summary;
pub mod v2v;
pub mod world;

pub use controller::{ControllerConfig, ControllerState, ProximityLevel};
pub use dispatch::{DispatchStore, ResponderRegistry};
pub use event_log::{EventKind, EventLog};
pub use geo::GeoCoordinate;
pub use runner::run;
pub use scenario::{parse_scenario, Scenario};
pub use summary::summarize;
pub use world::{Vehicle, VehicleId, WorldState};
