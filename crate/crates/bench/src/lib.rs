//! Shared fixtures for the benchmarks.

use uwauth_core::curve::SnrPoint;
use uwauth_core::ranging::{AmplitudeMode, LinkConfig, RangingLink};
use uwauth_core::sim::{ChannelMode, Experiment, OccupantLaw, TrialPlan};
use uwauth_core::{Deployment, DetectionMode, EveScenario, FusionRule, Result, Thresholds};

pub const D0: f64 = 500.0;

/// Ten nodes in a 500 m zone, the default deployment seed.
pub fn deployment() -> Result<Deployment> {
    Deployment::seeded(10, D0, 10.0, 291)
}

pub fn thresholds() -> Thresholds {
    Thresholds { d0: D0, eps_p: 1.0, eps_d: 1.0, eps_theta: 1.0 }
}

pub fn eve() -> EveScenario {
    EveScenario::OutsideRing { k: 2.0, epsilon: 1.0 }
}

pub fn link() -> Result<RangingLink> {
    RangingLink::new(LinkConfig { amplitude: AmplitudeMode::Oracle, ..LinkConfig::default() })
}

/// A one-point experiment at `snr_db` for the given channel.
pub fn experiment(channel: ChannelMode, snr_db: f64) -> Result<Experiment> {
    let (detection_mode, link) = match channel {
        ChannelMode::AwgnFeatures => (DetectionMode::Full, None),
        ChannelMode::ColoredWaveform => (DetectionMode::DistanceOnly, Some(link()?)),
    };
    let plan = TrialPlan {
        snr: vec![SnrPoint::from_db(snr_db)],
        n_trials: 1,
        seed: 1,
        occupant_law: OccupantLaw::EqualPriors,
        channel_mode: channel,
        detection_mode,
        step2_rule: FusionRule::And,
    };
    Experiment::new("bench", deployment()?, eve(), thresholds(), plan, link)
}
