use serde::Serialize;

use crate::curve::{ErrorRateCurve, Rate, RatePoint};
use crate::error::{contract, Result};

/// Which rows of a comparison decide pass or fail.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GatePolicy {
    #[default]
    All,
    /// Only points at or above this SNR (dB) gate; lower points are
    /// reported for information.
    MinSnr(f64),
    /// Nothing gates.
    InfoOnly,
}

impl GatePolicy {
    fn gates(self, snr_db: f64) -> bool {
        match self {
            GatePolicy::All => true,
            GatePolicy::MinSnr(s) => snr_db >= s,
            GatePolicy::InfoOnly => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub scenario_id: String,
    pub test: String,
    pub fusion: String,
    pub snr_db: f64,
    /// `p_fa`, `p_md` or `p_mc`.
    pub rate: &'static str,
    pub montecarlo: f64,
    pub analytic: f64,
    pub n: u64,
    /// The larger of the two binomial standard errors.
    pub se: f64,
    pub flagged: bool,
    pub gating: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn flags(&self) -> usize {
        self.rows.iter().filter(|r| r.flagged && r.gating).count()
    }

    pub fn pass(&self) -> bool {
        self.flags() == 0
    }

    pub fn extend(&mut self, other: ComparisonReport) {
        self.rows.extend(other.rows);
    }
}

/// Agreement threshold in standard errors.
pub const SE_LIMIT: f64 = 3.0;

fn binomial_se(p: f64, n: u64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Flags every point where the Monte Carlo and analytic rates differ by
/// more than three binomial standard errors. The standard error is the
/// larger of the two evaluated at `p_mc` and `p_an`, so an empirical count
/// of zero (or of every trial) does not collapse it to zero.
pub fn compare_mc_analytic(
    mc: &ErrorRateCurve,
    an: &ErrorRateCurve,
    gate: GatePolicy,
) -> Result<ComparisonReport> {
    if mc.points.len() != an.points.len()
        || mc.points.iter().zip(&an.points).any(|(a, b)| (a.snr_db - b.snr_db).abs() > 1e-9)
    {
        return Err(contract(format!(
            "SNR grids differ for {}/{}: {:?} vs {:?}",
            mc.test,
            mc.fusion,
            mc.points.iter().map(|p| p.snr_db).collect::<Vec<_>>(),
            an.points.iter().map(|p| p.snr_db).collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (m, a) in mc.points.iter().zip(&an.points) {
        let pick: [(&'static str, fn(&RatePoint) -> Option<Rate>); 3] =
            [("p_fa", |p| p.p_fa), ("p_md", |p| p.p_md), ("p_mc", |p| p.p_mc)];
        for (name, get) in pick {
            let (Some(rm), Some(ra)) = (get(m), get(a)) else { continue };
            let Some(n) = rm.n else {
                return Err(contract("Monte Carlo rate without a trial count"));
            };
            let se = binomial_se(rm.value, n).max(binomial_se(ra.value, n));
            let diff = (rm.value - ra.value).abs();
            rows.push(ComparisonRow {
                scenario_id: mc.scenario_id.clone(),
                test: mc.test.clone(),
                fusion: mc.fusion.clone(),
                snr_db: m.snr_db,
                rate: name,
                montecarlo: rm.value,
                analytic: ra.value,
                n,
                se,
                flagged: diff > SE_LIMIT * se,
                gating: gate.gates(m.snr_db),
            });
        }
    }
    Ok(ComparisonReport { rows })
}
