//! Dual-radio proximity toolkit: a deterministic simulator of a combined
//! discovery + ranging wearable system, and the full measurement pipeline
//! that turns raw pairwise distance samples into close-proximity contacts,
//! contagion-risk classifications and group/role/activity analyses.
//!
//! The crate is organized along the pipeline:
//!
//! * [`model`] — shared data model and file formats
//! * [`sim`] — discrete-event simulator emitting measurement logs
//! * [`preprocess`] — cleaning of raw logs (active windows, storage runs,
//!   absences)
//! * [`contacts`] — aggregation of measurement streams into contacts
//! * [`risk`] — risk classification and the derived analyses
//! * [`report`] — text-table rendering of the report structures

pub mod contacts;
pub mod error;
pub mod io;
pub mod model;
pub mod preprocess;
pub mod report;
pub mod risk;
pub mod sim;

pub use contacts::{Contact, ContactParams};
pub use error::{Error, Result};
pub use model::{
    ActivityBlock, DeviceId, DevicePair, ExemptionSet, Location, Participant, RawMeasurement,
    RiskLevel, Role, Roster, Schedule, DEFAULT_MAX_RANGE_M,
};
pub use preprocess::{Absences, ActiveWindows, PreprocessParams};
pub use risk::{RiskBand, RiskThresholds};
pub use sim::{mobility::MobilityScript, SimConfig};
