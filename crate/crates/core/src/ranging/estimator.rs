//! Maximum-likelihood time of arrival by exhaustive search over the slot.
//!
//! Candidate `t1` (1-based, `1..=Q`) places the waveform start at sample
//! index `t1 - 1`. The objective for a candidate is the whitened residual
//! `|L^-1 (y - a s_t1)|^2`, which is `sigma^2` times the Mahalanobis
//! distance `(y - a s)^T C^-1 (y - a s)`. The scale does not change the
//! argmin.

use crate::env::NoiseCovariance;
use crate::error::{contract, domain, Result};
use crate::ranging::waveform::PnWaveform;

/// `(1/Q) sum y[n]^2`.
pub fn estimate_pr(y: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64
}

/// Result of one search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToaEstimate {
    /// Estimated `t1`, 1-based sample index of the waveform start.
    pub toa_index: usize,
    /// Objective value at the estimate.
    pub objective: f64,
    /// Received power used to scale the templates.
    pub pr_hat: f64,
}

/// Whitened unit-power templates for every candidate delay, built once and
/// shared across trials.
#[derive(Debug, Clone)]
pub struct ToaEstimator {
    q: usize,
    cov: NoiseCovariance,
    /// Row `t` holds `L^-1 s(t)` for delay `t` samples.
    templates: Vec<f64>,
    /// First nonzero index of each whitened template.
    starts: Vec<usize>,
}

impl ToaEstimator {
    pub fn new(wave: &PnWaveform, cov: &NoiseCovariance) -> Result<Self> {
        let q = cov.q();
        let mut templates = Vec::with_capacity(q * q);
        let mut starts = Vec::with_capacity(q);
        for t in 0..q {
            let s = wave.synth(q, t as f64, 1.0)?.s;
            let w = cov.whiten(&s)?;
            // L^-1 is lower triangular, so leading zeros survive whitening.
            starts.push(w.iter().position(|&x| x != 0.0).unwrap_or(q));
            templates.extend_from_slice(&w);
        }
        Ok(Self { q, cov: cov.clone(), templates, starts })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn covariance(&self) -> &NoiseCovariance {
        &self.cov
    }

    fn whitened_input(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.q {
            return Err(contract(format!(
                "received vector has {} samples, estimator expects Q = {}",
                y.len(),
                self.q
            )));
        }
        self.cov.whiten(y)
    }

    fn residual(&self, yw: &[f64], t: usize, a: f64) -> f64 {
        let tpl = &self.templates[t * self.q..(t + 1) * self.q];
        let start = self.starts[t];
        let head: f64 = yw[..start].iter().map(|v| v * v).sum();
        let tail: f64 = yw[start..]
            .iter()
            .zip(&tpl[start..])
            .map(|(y, s)| {
                let r = y - a * s;
                r * r
            })
            .sum();
        head + tail
    }

    fn amplitude(pr: f64) -> Result<f64> {
        if !(pr >= 0.0 && pr.is_finite()) {
            return Err(domain(format!("received power must be finite and >= 0, got {pr}")));
        }
        Ok(pr.sqrt())
    }

    /// Objective for every candidate; entry `i` belongs to `t1 = i + 1`.
    pub fn objective_curve(&self, y: &[f64], pr: f64) -> Result<Vec<f64>> {
        let a = Self::amplitude(pr)?;
        let yw = self.whitened_input(y)?;
        Ok((0..self.q).map(|t| self.residual(&yw, t, a)).collect())
    }

    /// Searches all candidates. `pr` overrides the template power; `None`
    /// plugs in [`estimate_pr`]. Ties go to the smallest candidate.
    pub fn estimate(&self, y: &[f64], pr: Option<f64>) -> Result<ToaEstimate> {
        let pr_hat = pr.unwrap_or_else(|| estimate_pr(y));
        let a = Self::amplitude(pr_hat)?;
        let yw = self.whitened_input(y)?;
        let mut best = (0, f64::INFINITY);
        for t in 0..self.q {
            let v = self.residual(&yw, t, a);
            if v < best.1 {
                best = (t, v);
            }
        }
        Ok(ToaEstimate { toa_index: best.0 + 1, objective: best.1, pr_hat })
    }
}

/// Estimated `t1` for `y` with the received power estimated from `y`.
pub fn ml_toa(y: &[f64], estimator: &ToaEstimator) -> Result<usize> {
    estimator.estimate(y, None).map(|e| e.toa_index)
}
