//! Cramér-Rao bounds for the ToA estimate and the distance variance they
//! imply, plus the round-trip-time to distance conversion.
//!
//! Two bound forms exist. The Fisher form `sigma^2 / (P_R sdot^T C^-1 sdot)`
//! is the textbook bound for a known waveform in Gaussian noise. The
//! factor-4 form carries an extra factor 4 in the denominator, from a doubled
//! derivative of the log-likelihood; it sits a factor 4 below what an
//! efficient estimator reaches. Both are available and callers pick one
//! explicitly.

use serde::{Deserialize, Serialize};

use crate::env::{pathloss_linear, AcousticParams, NoiseCovariance};
use crate::error::{domain, Error, Result};
use crate::geometry::Deployment;
use crate::units::SOUND_SPEED;

/// Which CRB expression to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrbForm {
    /// `sigma^2 / (4 P_R q)`.
    Factor4,
    /// `sigma^2 / (P_R q)`.
    #[default]
    Fisher,
}

impl CrbForm {
    fn divisor(self) -> f64 {
        match self {
            CrbForm::Factor4 => 4.0,
            CrbForm::Fisher => 1.0,
        }
    }
}

/// `sdot^T C_norm^-1 sdot` for a unit-power derivative template, with the
/// sampling interval needed to express it per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySensitivity {
    /// Quadratic form with the derivative taken per sample of delay.
    pub per_sample2: f64,
    /// Sampling interval (s).
    pub t_s: f64,
}

impl DelaySensitivity {
    pub fn new(cov: &NoiseCovariance, s_dot: &[f64], t_s: f64) -> Result<Self> {
        if !(t_s > 0.0) {
            return Err(domain(format!("sampling interval must be positive, got {t_s}")));
        }
        Ok(Self { per_sample2: quad_form_nonzero(cov, s_dot)?, t_s })
    }

    /// Quadratic form with the derivative taken per second of delay.
    pub fn per_second2(&self) -> f64 {
        self.per_sample2 / (self.t_s * self.t_s)
    }
}

fn quad_form_nonzero(cov: &NoiseCovariance, s_dot: &[f64]) -> Result<f64> {
    let q = cov.quad_form(s_dot)?;
    if !(q > 0.0) {
        return Err(Error::DegenerateSignal("sdot^T C^-1 sdot is zero".into()));
    }
    Ok(q)
}

fn crb(form: CrbForm, cov: &NoiseCovariance, s_dot: &[f64], pr: f64) -> Result<f64> {
    if !(pr > 0.0) {
        return Err(domain(format!("received power must be positive, got {pr}")));
    }
    let q = quad_form_nonzero(cov, s_dot)?;
    Ok(cov.sigma2() / (form.divisor() * pr * q))
}

/// CRB of `t1` in samples^2, factor-4 form `sigma^2 / (4 P_R sdot^T C^-1 sdot)`.
/// `s_dot` is the unit-power derivative template.
pub fn crb_toa(cov: &NoiseCovariance, s_dot: &[f64], pr: f64) -> Result<f64> {
    crb(CrbForm::Factor4, cov, s_dot, pr)
}

/// Textbook Fisher bound `sigma^2 / (P_R sdot^T C^-1 sdot)` in samples^2.
pub fn crb_toa_fisher(cov: &NoiseCovariance, s_dot: &[f64], pr: f64) -> Result<f64> {
    crb(CrbForm::Fisher, cov, s_dot, pr)
}

/// CRB in the chosen form.
pub fn crb_toa_form(form: CrbForm, cov: &NoiseCovariance, s_dot: &[f64], pr: f64) -> Result<f64> {
    crb(form, cov, s_dot, pr)
}

/// A distance computed from a round-trip time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeEstimate {
    /// Meters, never negative.
    pub distance: f64,
    /// Set when the raw value was negative and clamped to zero.
    pub clamped: bool,
}

/// `z = (v/2)(t1_hat - t0 - T_s)`, clamped at zero.
pub fn rtt_to_distance(t1_hat: f64, t0: f64, switching_delay: f64) -> RangeEstimate {
    let raw = 0.5 * SOUND_SPEED * (t1_hat - t0 - switching_delay);
    if raw < 0.0 {
        RangeEstimate { distance: 0.0, clamped: true }
    } else {
        RangeEstimate { distance: raw, clamped: false }
    }
}

/// Distance-estimate variance (m^2) implied by the ToA bound:
/// `v^2 PL / (c SNR P_T sdot^T C^-1 sdot)` with the derivative per second and
/// `c = 16` for the factor-4 form, `c = 4` for the Fisher form.
pub fn sigma_d2(
    snr: f64,
    pathloss: f64,
    pt: f64,
    sensitivity: &DelaySensitivity,
    form: CrbForm,
) -> Result<f64> {
    if !(snr > 0.0 && pathloss > 0.0 && pt > 0.0) {
        return Err(domain(format!(
            "SNR, pathloss and transmit power must be positive (got {snr}, {pathloss}, {pt})"
        )));
    }
    let q = sensitivity.per_second2();
    if !(q > 0.0) {
        return Err(Error::DegenerateSignal("sdot^T C^-1 sdot is zero".into()));
    }
    let v2 = SOUND_SPEED * SOUND_SPEED;
    Ok(v2 * pathloss / (4.0 * form.divisor() * snr * pt * q))
}

/// Distance standard deviation as a function of the transmitter's range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSigma {
    pub carrier_khz: f64,
    pub nu: f64,
    pub pt: f64,
    pub snr: f64,
    pub sensitivity: DelaySensitivity,
    pub form: CrbForm,
}

impl RangeSigma {
    pub fn sigma2(&self, distance: f64) -> Result<f64> {
        let pl = pathloss_linear(distance, self.carrier_khz, self.nu)?;
        sigma_d2(self.snr, pl, self.pt, &self.sensitivity, self.form)
    }

    pub fn sigma(&self, distance: f64) -> Result<f64> {
        self.sigma2(distance).map(f64::sqrt)
    }
}

/// Per-node distance deviations and the evaluator for Eve.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSigmas {
    pub alice: Vec<f64>,
    pub eve: RangeSigma,
}

/// Distance standard deviation of every Alice node, each from its own
/// pathloss, and the same law as a function of Eve's range.
pub fn per_node_sigma(
    dep: &Deployment,
    params: &AcousticParams,
    snr: f64,
    pt: f64,
    sensitivity: &DelaySensitivity,
    form: CrbForm,
) -> Result<NodeSigmas> {
    let eve = RangeSigma { carrier_khz: params.carrier_khz, nu: params.nu, pt, snr, sensitivity: *sensitivity, form };
    let alice = dep.alice.iter().map(|a| eve.sigma(a.distance)).collect::<Result<Vec<_>>>()?;
    Ok(NodeSigmas { alice, eve })
}
