//! Near-field beam training for reflecting surfaces, at desk scale.
//!
//! A large reflecting array serving a nearby user sits well inside its own
//! Rayleigh distance, so beams must focus on (angle, distance) points
//! rather than plane-wave directions. This crate simulates that regime
//! end to end:
//!
//! * [`geometry`] — exact spherical-wave channel, received power, rates,
//!   reference SNR;
//! * [`codebook`] — near-field / far-field / random-phase / polar-domain
//!   codebooks and normalized beam patterns;
//! * [`training`] — noisy measurement model and the training schemes:
//!   the two-layer scheme (random-phase distance estimation, then a
//!   focused angle sweep) plus DFT, exhaustive polar and two-phase
//!   benchmarks and a perfect-CSI bound;
//! * [`experiment`] — seeded, paired Monte-Carlo sweeps over reference SNR
//!   or user distance with CSV/JSON reports;
//! * [`stats`] — statistical checks behind the random-phase distance
//!   estimator.

pub mod codebook;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod stats;
pub mod training;

pub use codebook::{BeamLabel, BeamPattern, Codebook, CodebookKind, PhaseVector};
pub use error::{Error, Result};
pub use experiment::{ExperimentReport, ExperimentSpec, ReportRow, SweepAxis};
pub use geometry::{achievable_rate, ChannelVector, PolarPoint, SystemConfig};
pub use training::{MeasurementModel, Scheme, TrainingOutcome};
