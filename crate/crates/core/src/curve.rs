//! Error-rate curves shared by the Monte Carlo and analytic paths.

use serde::{Deserialize, Serialize};

/// Where a curve came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    #[serde(rename = "montecarlo")]
    MonteCarlo,
    Analytic,
}

impl Source {
    pub fn label(self) -> &'static str {
        match self {
            Source::MonteCarlo => "montecarlo",
            Source::Analytic => "analytic",
        }
    }
}

/// One SNR grid point, converted to linear once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    pub db: f64,
    pub linear: f64,
}

impl SnrPoint {
    pub fn from_db(db: f64) -> Self {
        Self { db, linear: crate::units::db_to_linear(db) }
    }

    /// Common measurement deviation `1/sqrt(SNR)`.
    pub fn sigma(&self) -> f64 {
        self.linear.sqrt().recip()
    }
}

/// Wald 95% half-width `1.96 sqrt(p (1 - p) / n)`.
pub fn wald_halfwidth(p: f64, n: u64) -> f64 {
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

/// One probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub value: f64,
    /// Wald half-width (Monte Carlo only).
    pub ci: Option<f64>,
    /// Number of trials in the denominator (Monte Carlo only).
    pub n: Option<u64>,
}

impl Rate {
    /// Empirical rate `hits / n`, or `None` when `n == 0`.
    pub fn empirical(hits: u64, n: u64) -> Option<Self> {
        (n > 0).then(|| {
            let p = hits as f64 / n as f64;
            Rate { value: p, ci: Some(wald_halfwidth(p, n)), n: Some(n) }
        })
    }

    pub fn exact(value: f64) -> Self {
        Rate { value, ci: None, n: None }
    }
}

/// Rates at one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub snr_db: f64,
    pub p_fa: Option<Rate>,
    pub p_md: Option<Rate>,
    pub p_mc: Option<Rate>,
    /// Trials run at this point (Monte Carlo only).
    pub n_trials: Option<u64>,
    /// Diagnostic count: clamped or otherwise flagged trials.
    pub flags: u64,
}

impl RatePoint {
    pub fn empty(snr_db: f64) -> Self {
        Self { snr_db, p_fa: None, p_md: None, p_mc: None, n_trials: None, flags: 0 }
    }
}

/// One family of rates against SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateCurve {
    pub scenario_id: String,
    pub source: Source,
    /// `step1`, `position`, `distance`, `aoa`, `step2`, `final` or
    /// `identification`.
    pub test: String,
    /// `none`, `and`, `or` or `mv`.
    pub fusion: String,
    pub points: Vec<RatePoint>,
}

impl ErrorRateCurve {
    /// File-name stem of the curve family.
    pub fn family(&self) -> String {
        match (self.test.as_str(), self.fusion.as_str()) {
            ("position", _) => "test2a_position".into(),
            ("distance", _) => "test2b_distance".into(),
            ("aoa", _) => "test2c_aoa".into(),
            ("step2", f) => format!("fusion_{f}"),
            (t, _) => t.into(),
        }
    }
}
