//! PN ranging: waveform synthesis, ML time of arrival, bounds, and the
//! end-to-end link used by the colored-noise simulation.

pub mod bounds;
pub mod estimator;
pub mod link;
pub mod pn;
pub mod trace;
pub mod waveform;

pub use bounds::{
    crb_toa, crb_toa_fisher, crb_toa_form, per_node_sigma, rtt_to_distance, sigma_d2, CrbForm,
    DelaySensitivity, NodeSigmas, RangeEstimate, RangeSigma,
};
pub use estimator::{estimate_pr, ml_toa, ToaEstimate, ToaEstimator};
pub use link::{AmplitudeMode, LinkConfig, RangingLink, RangingResult};
pub use pn::gen_pn;
pub use waveform::{synth_waveform, PnWaveform, PulseShape, Synthesis};
