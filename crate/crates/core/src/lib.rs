//! Physical-layer impersonation detection for line-of-sight underwater
//! acoustic sensor networks.
//!
//! A sink authenticates each transmission by its physical fingerprint:
//! round-trip-time distance, angle of arrival and the implied position.
//! The crate covers the channel model ([`env`]), deployments ([`geometry`]),
//! PN ranging in colored noise ([`ranging`]), the two-step detector
//! ([`detect`]), closed-form error probabilities ([`analytic`]) and a
//! deterministic Monte Carlo engine ([`sim`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod curve;
pub mod detect;
pub mod env;
pub mod error;
pub mod geometry;
pub mod ranging;
pub mod sim;
pub mod units;

pub use detect::{
    algorithm1, DecisionRecord, DetectionMode, FusionRule, Hypothesis, Measurement, Occupant, Thresholds,
};
pub use curve::{ErrorRateCurve, Rate, RatePoint, SnrPoint, Source};
pub use env::{AcousticParams, NoiseCovariance};
pub use error::{Error, Result};
pub use geometry::{Deployment, EveScenario, GroundTruth, Point, PolarPosition};
pub use ranging::{CrbForm, LinkConfig, RangingLink};
