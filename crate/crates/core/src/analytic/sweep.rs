//! Analytic error-rate curves over an SNR grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::context::{AnalyticContext, EveSigma, SigmaModel};
use crate::analytic::exact::{
    pe_misclassification_exact, pfa_test2b_exact, pfa_test2c_exact, pmd_bar_test2b_exact,
    pmd_bar_test2c_exact,
};
use crate::analytic::formulas::{
    pe_misclassification, pfa_test1, pfa_test2b, pfa_test2c, pmd_bar_test1, pmd_bar_test2b,
    pmd_bar_test2c, Feature, Normalization,
};
use crate::curve::{ErrorRateCurve, Rate, RatePoint, SnrPoint, Source};
use crate::detect::{DetectionMode, Thresholds};
use crate::error::{domain, Result};
use crate::geometry::{Deployment, EveScenario};
use crate::ranging::RangingLink;

/// Which set of formulas to evaluate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticForm {
    /// Per-node acceptance regions and bounded outer cells.
    #[default]
    PerNode,
    /// Union of regions and open outer cells, matching the detector.
    Exact,
}

/// Rates of one test at one SNR, already normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestRates {
    pub p_fa: f64,
    pub p_md: f64,
    pub p_mc: Option<f64>,
}

/// Step-1 rates.
pub fn step1_rates(ctx: &AnalyticContext, norm: Normalization) -> Result<TestRates> {
    let m = ctx.m();
    Ok(TestRates {
        p_fa: norm.alice_rate(pfa_test1(ctx)?, m),
        p_md: norm.eve_rate(pmd_bar_test1(ctx)?, m),
        p_mc: None,
    })
}

/// Rates of the distance (or AoA) outlier test with its identification
/// error.
pub fn feature_rates(
    ctx: &AnalyticContext,
    feature: Feature,
    eps: f64,
    form: AnalyticForm,
    norm: Normalization,
) -> Result<TestRates> {
    let m = ctx.m();
    let (pfa, pmd, pe) = match (feature, form) {
        (Feature::Distance, AnalyticForm::PerNode) => {
            (pfa_test2b(ctx, eps)?, pmd_bar_test2b(ctx, eps)?, pe_misclassification(ctx, feature)?)
        }
        (Feature::Distance, AnalyticForm::Exact) => (
            pfa_test2b_exact(ctx, eps)?,
            pmd_bar_test2b_exact(ctx, eps)?,
            pe_misclassification_exact(ctx, feature)?,
        ),
        (Feature::Aoa, AnalyticForm::PerNode) => {
            (pfa_test2c(ctx, eps)?, pmd_bar_test2c(ctx, eps)?, pe_misclassification(ctx, feature)?)
        }
        (Feature::Aoa, AnalyticForm::Exact) => (
            pfa_test2c_exact(ctx, eps)?,
            pmd_bar_test2c_exact(ctx, eps)?,
            pe_misclassification_exact(ctx, feature)?,
        ),
    };
    Ok(TestRates {
        p_fa: norm.alice_rate(pfa, m),
        p_md: norm.eve_rate(pmd, m),
        p_mc: Some(norm.alice_rate(pe.total, m)),
    })
}

/// Everything needed to evaluate the analytic curves of one scenario.
#[derive(Debug, Clone)]
pub struct AnalyticSweep<'a> {
    pub scenario_id: String,
    pub deployment: &'a Deployment,
    pub eve: EveScenario,
    pub thresholds: Thresholds,
    pub mode: DetectionMode,
    /// Ranging link for per-node deviations; `None` means the common
    /// `1/sqrt(SNR)` deviation.
    pub link: Option<&'a RangingLink>,
    pub form: AnalyticForm,
    pub normalization: Normalization,
    /// Multiplies every deviation. 1 in normal use.
    pub sigma_scale: f64,
}

impl AnalyticSweep<'_> {
    /// Noise model at one grid point.
    pub fn sigma_model(&self, snr: &SnrPoint) -> Result<SigmaModel> {
        let base = match self.link {
            None => SigmaModel::Awgn { sigma: snr.sigma() },
            Some(link) => {
                let ns = link.node_sigmas(self.deployment, snr.linear)?;
                SigmaModel::PerNode { alice: ns.alice, eve: EveSigma::Range(ns.eve) }
            }
        };
        base.scaled(self.sigma_scale)
    }

    pub fn context(&self, snr: &SnrPoint) -> Result<AnalyticContext> {
        AnalyticContext::new(self.deployment, &self.eve, self.sigma_model(snr)?)
    }

    fn aoa_enabled(&self) -> bool {
        self.mode == DetectionMode::Full && self.link.is_none()
    }

    /// One curve per family: `step1`, `distance` and, with AoA available,
    /// `aoa`.
    pub fn curves(&self, grid: &[SnrPoint]) -> Result<Vec<ErrorRateCurve>> {
        if grid.is_empty() {
            return Err(domain("SNR grid is empty"));
        }
        let th = self.thresholds;
        th.validate()?;
        let rows: Vec<(TestRates, TestRates, Option<TestRates>)> = grid
            .par_iter()
            .map(|snr| {
                let ctx = self.context(snr)?;
                let s1 = step1_rates(&ctx, self.normalization)?;
                let d = feature_rates(&ctx, Feature::Distance, th.eps_d, self.form, self.normalization)?;
                let a = if self.aoa_enabled() {
                    Some(feature_rates(&ctx, Feature::Aoa, th.eps_theta, self.form, self.normalization)?)
                } else {
                    None
                };
                Ok((s1, d, a))
            })
            .collect::<Result<_>>()?;
        let curve = |test: &str, pick: &dyn Fn(&(TestRates, TestRates, Option<TestRates>)) -> Option<TestRates>| {
            ErrorRateCurve {
                scenario_id: self.scenario_id.clone(),
                source: Source::Analytic,
                test: test.into(),
                fusion: "none".into(),
                points: grid
                    .iter()
                    .zip(&rows)
                    .map(|(snr, row)| {
                        let mut p = RatePoint::empty(snr.db);
                        if let Some(r) = pick(row) {
                            p.p_fa = Some(Rate::exact(r.p_fa));
                            p.p_md = Some(Rate::exact(r.p_md));
                            p.p_mc = r.p_mc.map(Rate::exact);
                        }
                        p
                    })
                    .collect(),
            }
        };
        let mut out = vec![curve("step1", &|r| Some(r.0)), curve("distance", &|r| Some(r.1))];
        if self.aoa_enabled() {
            out.push(curve("aoa", &|r| r.2));
        }
        Ok(out)
    }
}
