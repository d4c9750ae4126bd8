//! Monte Carlo engine: per-slot trials, SNR sweeps, rate estimation and
//! comparison against the analytic curves.
//!
//! Every trial owns a ChaCha8 stream keyed by `(seed, snr index, trial
//! index)`, so a sweep gives the same numbers for any worker count and any
//! scheduling order.

mod compare;
mod counters;
mod sweep;

pub use compare::{compare_mc_analytic, ComparisonReport, ComparisonRow, GatePolicy};
pub use counters::{estimate_rates, PointCounters, TestCounts};
pub use sweep::{run_sweep, DistanceErrorStats, PointDiagnostics, SweepOptions, SweepResult};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::curve::SnrPoint;
use crate::detect::{algorithm1, DecisionRecord, DetectionMode, FusionRule, Measurement, Occupant, Thresholds};
use crate::error::{contract, domain, Result};
use crate::geometry::{ground_truth, place_eve, Deployment, EveScenario, GroundTruth};
use crate::ranging::RangingLink;

/// Who occupies a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OccupantLaw {
    /// Each Alice and Eve with probability `1/(M+1)`.
    #[default]
    EqualPriors,
    /// Eve in every slot.
    EveOnly,
    /// A uniformly chosen Alice in every slot.
    AliceOnly,
}

/// How measurements are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    /// Gaussian noise with deviation `1/sqrt(SNR)` added to every feature.
    #[default]
    AwgnFeatures,
    /// PN waveform through pathloss and colored noise, ranged by ML ToA.
    ColoredWaveform,
}

/// SNR grid, trial counts and modes of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub snr: Vec<SnrPoint>,
    pub n_trials: u64,
    pub seed: u64,
    pub occupant_law: OccupantLaw,
    pub channel_mode: ChannelMode,
    pub detection_mode: DetectionMode,
    pub step2_rule: FusionRule,
}

impl TrialPlan {
    pub fn validate(&self) -> Result<()> {
        if self.snr.is_empty() {
            return Err(domain("plan.snr_grid_db must not be empty"));
        }
        if self.n_trials == 0 {
            return Err(domain("plan.n_trials must be at least 1"));
        }
        match (self.channel_mode, self.detection_mode) {
            (ChannelMode::AwgnFeatures, DetectionMode::Full)
            | (ChannelMode::ColoredWaveform, DetectionMode::DistanceOnly) => Ok(()),
            (c, d) => Err(domain(format!(
                "plan.detection_mode = {d:?} cannot be used with channel.mode = {c:?} \
                 (awgn_features pairs with full, colored_waveform with distance_only)"
            ))),
        }
    }
}

/// A fixed deployment, attacker scenario and plan.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub scenario_id: String,
    pub deployment: Deployment,
    pub eve: EveScenario,
    pub thresholds: Thresholds,
    pub plan: TrialPlan,
    link: Option<RangingLink>,
    truth: GroundTruth,
}

impl Experiment {
    /// `link` is required for the colored-waveform channel and ignored
    /// otherwise.
    pub fn new(
        scenario_id: impl Into<String>,
        deployment: Deployment,
        eve: EveScenario,
        thresholds: Thresholds,
        plan: TrialPlan,
        link: Option<RangingLink>,
    ) -> Result<Self> {
        deployment.validate()?;
        eve.validate(&deployment)?;
        thresholds.validate()?;
        plan.validate()?;
        if thresholds.d0 != deployment.d0 {
            return Err(contract(format!(
                "threshold d0 = {} differs from the deployment's d0 = {}",
                thresholds.d0, deployment.d0
            )));
        }
        let link = match plan.channel_mode {
            ChannelMode::AwgnFeatures => None,
            ChannelMode::ColoredWaveform => {
                Some(link.ok_or_else(|| contract("the colored-waveform channel needs a ranging link"))?)
            }
        };
        let truth = ground_truth(&deployment);
        Ok(Self { scenario_id: scenario_id.into(), deployment, eve, thresholds, plan, link, truth })
    }

    pub fn truth(&self) -> &GroundTruth {
        &self.truth
    }

    pub fn link(&self) -> Option<&RangingLink> {
        self.link.as_ref()
    }

    pub fn m(&self) -> usize {
        self.deployment.m()
    }
}

/// Output of one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub record: DecisionRecord,
    /// The distance estimate was clamped at zero.
    pub flagged: bool,
    /// `z - d_true` of the transmitter.
    pub distance_error: f64,
}

/// Stream of trial `trial` at grid point `snr_index`.
pub fn trial_rng(seed: u64, snr_index: usize, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(snr_index as u64).to_le_bytes());
    key[16..24].copy_from_slice(&trial.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn draw_occupant<R: Rng + ?Sized>(law: OccupantLaw, m: usize, rng: &mut R) -> Occupant {
    match law {
        OccupantLaw::EqualPriors => {
            let k = rng.random_range(0..=m);
            if k == m {
                Occupant::Eve
            } else {
                Occupant::Alice(k)
            }
        }
        OccupantLaw::EveOnly => Occupant::Eve,
        OccupantLaw::AliceOnly => Occupant::Alice(rng.random_range(0..m)),
    }
}

/// Runs one slot.
pub fn run_trial(exp: &Experiment, snr_index: usize, trial: u64) -> Result<TrialOutcome> {
    let snr = exp
        .plan
        .snr
        .get(snr_index)
        .ok_or_else(|| contract(format!("SNR index {snr_index} out of range")))?;
    let mut rng = trial_rng(exp.plan.seed, snr_index, trial);
    let occupant = draw_occupant(exp.plan.occupant_law, exp.m(), &mut rng);
    let pos = match occupant {
        Occupant::Alice(i) => exp.deployment.alice[i],
        Occupant::Eve => place_eve(&exp.eve, &exp.deployment, &mut rng)?,
    };
    let (meas, flagged) = match exp.plan.channel_mode {
        ChannelMode::AwgnFeatures => {
            let sigma = snr.sigma();
            let gz: f64 = rng.sample(StandardNormal);
            let gy: f64 = rng.sample(StandardNormal);
            (Measurement::full(pos.distance + sigma * gz, pos.aoa + sigma * gy), false)
        }
        ChannelMode::ColoredWaveform => {
            let link = exp.link.as_ref().ok_or_else(|| contract("missing ranging link"))?;
            let r = link.range(pos.distance, snr.linear, &mut rng)?;
            (Measurement::distance_only(r.distance), r.clamped)
        }
    };
    let record = algorithm1(
        &meas,
        &exp.truth,
        &exp.thresholds,
        exp.plan.detection_mode,
        exp.plan.step2_rule,
        occupant,
    )?;
    Ok(TrialOutcome { record, flagged, distance_error: meas.z - pos.distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::Hypothesis;
    use crate::geometry::PolarPosition;

    pub(crate) fn deployment() -> Deployment {
        let alice = (0..4)
            .map(|i| PolarPosition::new(80.0 + 100.0 * i as f64, 20.0 + 40.0 * i as f64).unwrap())
            .collect();
        Deployment::new(500.0, 10.0, alice).unwrap()
    }

    pub(crate) fn plan(snr_db: &[f64], n: u64, law: OccupantLaw) -> TrialPlan {
        TrialPlan {
            snr: snr_db.iter().copied().map(SnrPoint::from_db).collect(),
            n_trials: n,
            seed: 7,
            occupant_law: law,
            channel_mode: ChannelMode::AwgnFeatures,
            detection_mode: DetectionMode::Full,
            step2_rule: FusionRule::And,
        }
    }

    pub(crate) fn experiment(eve: EveScenario, plan: TrialPlan) -> Experiment {
        let th = Thresholds { d0: 500.0, eps_p: 1.0, eps_d: 1.0, eps_theta: 1.0 };
        Experiment::new("test", deployment(), eve, th, plan, None).unwrap()
    }

    #[test]
    fn noiseless_alice_is_accepted_and_identified() {
        let exp = experiment(EveScenario::InsideUniform, plan(&[f64::INFINITY], 1, OccupantLaw::AliceOnly));
        for t in 0..50 {
            let out = run_trial(&exp, 0, t).unwrap();
            let Occupant::Alice(i) = out.record.truth else { panic!() };
            assert_eq!(out.record.final_decision, Hypothesis::H0);
            assert_eq!(out.record.identified, Some(i));
            assert_eq!(out.distance_error, 0.0);
        }
    }

    #[test]
    fn noiseless_outside_eve_fails_step1() {
        let eve = EveScenario::OutsideRing { k: 2.0, epsilon: 1.0 };
        let exp = experiment(eve, plan(&[f64::INFINITY], 1, OccupantLaw::EveOnly));
        for t in 0..50 {
            let r = run_trial(&exp, 0, t).unwrap().record;
            assert_eq!(r.step1, Hypothesis::H1);
            assert_eq!(r.final_decision, Hypothesis::H1);
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let exp = experiment(EveScenario::InsideUniform, plan(&[0.0, 10.0], 1, OccupantLaw::EqualPriors));
        for t in [0, 1, 99, u64::MAX] {
            assert_eq!(run_trial(&exp, 1, t).unwrap(), run_trial(&exp, 1, t).unwrap());
        }
        assert_ne!(run_trial(&exp, 0, 3).unwrap(), run_trial(&exp, 1, 3).unwrap());
        assert!(run_trial(&exp, 2, 0).is_err());
    }

    #[test]
    fn equal_priors_frequency() {
        let exp = experiment(EveScenario::InsideUniform, plan(&[0.0], 1, OccupantLaw::EqualPriors));
        let n = 50_000;
        let eves = (0..n).filter(|&t| run_trial(&exp, 0, t).unwrap().record.truth == Occupant::Eve).count();
        let p = 0.2;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((eves as f64 / n as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn plan_pairings() {
        let mut p = plan(&[0.0], 1, OccupantLaw::EqualPriors);
        p.channel_mode = ChannelMode::ColoredWaveform;
        assert!(p.validate().is_err());
        p.detection_mode = DetectionMode::DistanceOnly;
        assert!(p.validate().is_ok());
        let th = Thresholds { d0: 500.0, eps_p: 1.0, eps_d: 1.0, eps_theta: 1.0 };
        // Colored without a link.
        assert!(Experiment::new("x", deployment(), EveScenario::InsideUniform, th, p.clone(), None).is_err());
        p.n_trials = 0;
        assert!(p.validate().is_err());
        let mut p = plan(&[], 1, OccupantLaw::EqualPriors);
        assert!(p.validate().is_err());
        p.snr.push(SnrPoint::from_db(0.0));
        assert!(p.validate().is_ok());
    }
}
