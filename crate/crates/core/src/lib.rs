//! Exact Fock-space simulation of heralded noiseless amplification and
//! entanglement concentration for single-photon entangled states, together
//! with the closed-form figures of merit it is checked against.
//!
//! * [`fock`]: sparse multi-photon states over named modes.
//! * [`elements`]: beam splitters, polarizing beam splitters and phase elements.
//! * [`detection`]: photon-number-resolving heralding.
//! * [`protocol`]: the full setup, per-pattern corrections and aggregate metrics.
//! * [`analytics`]: closed-form success probabilities, fidelity and gain.
//! * [`cli`]: `run`, `sweep`, `figure` and `validate` commands.

pub mod analytics;
pub mod cli;
pub mod config;
pub mod detection;
pub mod elements;
pub mod fock;
pub mod protocol;

pub use analytics::ClosedFormReport;
pub use detection::{DetectionPattern, DetectorMap};
pub use elements::OpticalElement;
pub use fock::{EnsembleState, ModeRegistry, Polarization, PureState};
pub use protocol::{run, ProtocolOutcome, ProtocolParams, T2};
