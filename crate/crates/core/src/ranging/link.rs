//! The full two-way ranging chain for one slot: PN response through pathloss
//! and colored noise, ML ToA search, and conversion to distance.
//!
//! Coarse acquisition is assumed: the sink opens its `Q`-sample window so
//! the response starts `acquisition_lead` samples (plus the sub-sample
//! remainder of the true arrival time) into the window. The window start is
//! known to the sink, so the distance error comes only from the fine search.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{pathloss_linear, AcousticParams, NoiseCovariance};
use crate::error::{domain, Result};
use crate::geometry::Deployment;
use crate::ranging::bounds::{
    crb_toa_form, per_node_sigma, rtt_to_distance, sigma_d2, CrbForm, DelaySensitivity, NodeSigmas,
};
use crate::ranging::estimator::{ToaEstimate, ToaEstimator};
use crate::ranging::pn::gen_pn;
use crate::ranging::waveform::{PnWaveform, PulseShape};
use crate::units::{db_to_linear, SOUND_SPEED};

/// How the template amplitude is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeMode {
    /// Plug in the sample power of the received vector.
    #[default]
    Estimated,
    /// Use the true received power.
    Oracle,
}

/// Waveform, timing and channel settings of the ranging link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    pub acoustic: AcousticParams,
    /// Transmit power, dB re uPa.
    pub pt_db: f64,
    /// Samples per slot.
    pub q: usize,
    /// Chip duration (s).
    pub t_b: f64,
    /// Sampling interval (s).
    pub t_s: f64,
    /// Responder switching delay (s).
    pub switching_delay: f64,
    /// Challenge start time on the sink clock (s).
    pub t0: f64,
    pub pn_length: usize,
    pub pn_seed: u32,
    pub pulse: PulseShape,
    /// Samples between the window start and the response start.
    pub acquisition_lead: usize,
    pub amplitude: AmplitudeMode,
    /// Replace the ambient-noise correlation by white noise.
    pub white_noise: bool,
    pub crb_form: CrbForm,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            acoustic: AcousticParams::default(),
            pt_db: 250.0,
            q: 128,
            t_b: 6.4e-3,
            t_s: 4e-4,
            switching_delay: 0.05,
            t0: 0.0,
            pn_length: 7,
            pn_seed: 1,
            pulse: PulseShape::default(),
            acquisition_lead: 4,
            amplitude: AmplitudeMode::Estimated,
            white_noise: false,
            crb_form: CrbForm::Fisher,
        }
    }
}

/// Outcome of ranging one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangingResult {
    /// Estimated start sample `t1` (1-based).
    pub toa_index: usize,
    /// Distance estimate (m), clamped at zero.
    pub distance: f64,
    pub clamped: bool,
    /// ToA bound in samples^2 (configured form).
    pub crb_toa: f64,
    /// Distance variance bound (m^2, configured form).
    pub sigma_d2: f64,
    /// Received power used by the template.
    pub pr_hat: f64,
}

/// Immutable per-run state of the ranging chain, shared across trials.
#[derive(Debug, Clone)]
pub struct RangingLink {
    cfg: LinkConfig,
    pt: f64,
    wave: PnWaveform,
    cov: NoiseCovariance,
    estimator: ToaEstimator,
    s_dot: Vec<f64>,
    sensitivity: DelaySensitivity,
}

impl RangingLink {
    pub fn new(cfg: LinkConfig) -> Result<Self> {
        cfg.acoustic.validate()?;
        if !cfg.pt_db.is_finite() {
            return Err(domain("pt_db must be finite"));
        }
        if !(cfg.switching_delay >= 0.0) {
            return Err(domain(format!("switching_delay must be >= 0, got {}", cfg.switching_delay)));
        }
        let chips = gen_pn(cfg.pn_length, cfg.pn_seed)?;
        let wave = PnWaveform::new(chips, cfg.t_b, cfg.t_s, cfg.pulse)?;
        let needed = cfg.acquisition_lead as f64 + 1.0 + wave.support_samples();
        if needed > cfg.q as f64 {
            return Err(domain(format!(
                "slot of q = {} samples cannot hold the response: lead + 1 + support = {needed:.2}",
                cfg.q
            )));
        }
        let cov = if cfg.white_noise {
            NoiseCovariance::white(cfg.q, 1.0)?
        } else {
            NoiseCovariance::from_params(&cfg.acoustic, cfg.t_s, cfg.q, 1.0)?
        };
        let estimator = ToaEstimator::new(&wave, &cov)?;
        let s_dot = wave.synth(cfg.q, cfg.acquisition_lead as f64, 1.0)?.s_dot;
        let sensitivity = DelaySensitivity::new(&cov, &s_dot, cfg.t_s)?;
        let pt = db_to_linear(cfg.pt_db);
        Ok(Self { cfg, pt, wave, cov, estimator, s_dot, sensitivity })
    }

    pub fn config(&self) -> &LinkConfig {
        &self.cfg
    }

    /// Linear transmit power.
    pub fn pt(&self) -> f64 {
        self.pt
    }

    pub fn waveform(&self) -> &PnWaveform {
        &self.wave
    }

    /// Normalized noise covariance (unit power).
    pub fn covariance(&self) -> &NoiseCovariance {
        &self.cov
    }

    pub fn estimator(&self) -> &ToaEstimator {
        &self.estimator
    }

    /// Unit-power derivative template at the nominal delay.
    pub fn s_dot(&self) -> &[f64] {
        &self.s_dot
    }

    pub fn sensitivity(&self) -> DelaySensitivity {
        self.sensitivity
    }

    /// Received power from a transmitter `distance` meters away.
    pub fn received_power(&self, distance: f64) -> Result<f64> {
        Ok(self.pt / pathloss_linear(distance, self.cfg.acoustic.carrier_khz, self.cfg.acoustic.nu)?)
    }

    /// One slot of received samples: the response at `delay` samples with
    /// power `pr`, plus noise of power `1/snr`.
    pub fn received<R: Rng + ?Sized>(&self, delay: f64, pr: f64, snr: f64, rng: &mut R) -> Result<Vec<f64>> {
        if !(snr > 0.0) {
            return Err(domain(format!("SNR must be positive, got {snr}")));
        }
        let mut y = self.wave.synth(self.cfg.q, delay, pr)?.s;
        let noise = self.cov.with_sigma2(1.0 / snr)?.sample(rng);
        for (v, n) in y.iter_mut().zip(noise) {
            *v += n;
        }
        Ok(y)
    }

    /// ML search honoring the configured amplitude mode.
    pub fn estimate(&self, y: &[f64], true_pr: f64) -> Result<ToaEstimate> {
        match self.cfg.amplitude {
            AmplitudeMode::Estimated => self.estimator.estimate(y, None),
            AmplitudeMode::Oracle => self.estimator.estimate(y, Some(true_pr)),
        }
    }

    /// Ranges a transmitter at `distance` meters.
    pub fn range<R: Rng + ?Sized>(&self, distance: f64, snr: f64, rng: &mut R) -> Result<RangingResult> {
        let pr = self.received_power(distance)?;
        let t_s = self.cfg.t_s;
        let arrival = self.cfg.t0 + self.cfg.switching_delay + 2.0 * distance / SOUND_SPEED;
        let whole = (arrival / t_s).floor();
        let lead = self.cfg.acquisition_lead as f64;
        let window_start = (whole - lead) * t_s;
        let delay = arrival / t_s - whole + lead;
        let y = self.received(delay, pr, snr, rng)?;
        let est = self.estimate(&y, pr)?;
        let t1_hat = window_start + (est.toa_index - 1) as f64 * t_s;
        let r = rtt_to_distance(t1_hat, self.cfg.t0, self.cfg.switching_delay);
        let noise = self.cov.with_sigma2(1.0 / snr)?;
        let crb = crb_toa_form(self.cfg.crb_form, &noise, &self.s_dot, pr)?;
        let pl = self.pt / pr;
        let sd2 = sigma_d2(snr, pl, self.pt, &self.sensitivity, self.cfg.crb_form)?;
        Ok(RangingResult {
            toa_index: est.toa_index,
            distance: r.distance,
            clamped: r.clamped,
            crb_toa: crb,
            sigma_d2: sd2,
            pr_hat: est.pr_hat,
        })
    }

    /// Distance deviations for the Alice nodes and Eve at one SNR.
    pub fn node_sigmas(&self, dep: &Deployment, snr: f64) -> Result<NodeSigmas> {
        per_node_sigma(dep, &self.cfg.acoustic, snr, self.pt, &self.sensitivity, self.cfg.crb_form)
    }

    /// Standard deviation of the grid quantization of the distance estimate,
    /// `(v T_S / 2) / sqrt(12)`.
    pub fn quantization_sigma(&self) -> f64 {
        0.5 * SOUND_SPEED * self.cfg.t_s / 12f64.sqrt()
    }
}
