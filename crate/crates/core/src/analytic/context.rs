//! Inputs shared by every closed-form probability: the fingerprints of the
//! legitimate nodes, the law of Eve's fingerprint and the measurement noise.

use crate::analytic::quadrature::quadrature_split_rel;
use crate::error::{contract, domain, Result};
use crate::geometry::{Deployment, EveScenario};
use crate::ranging::RangeSigma;

/// Law of one scalar fingerprint of Eve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law1D {
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Radius of a point uniform over the annulus `lo <= r <= hi`,
    /// density `2 r / (hi^2 - lo^2)`.
    AreaUniform { lo: f64, hi: f64 },
    Point(f64),
}

impl Law1D {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Law1D::Uniform { lo, hi } | Law1D::AreaUniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(domain(format!("empty support [{lo}, {hi}]")));
                }
                if matches!(self, Law1D::AreaUniform { .. }) && lo < 0.0 {
                    return Err(domain(format!("negative radius {lo}")));
                }
                Ok(())
            }
            Law1D::Point(x) if x.is_finite() => Ok(()),
            Law1D::Point(x) => Err(domain(format!("point mass at {x}"))),
        }
    }

    /// `(lo, hi)`; both ends coincide for a point mass.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Law1D::Uniform { lo, hi } | Law1D::AreaUniform { lo, hi } => (lo, hi),
            Law1D::Point(x) => (x, x),
        }
    }

    /// Density on the support (zero for a point mass).
    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        match *self {
            Law1D::Uniform { .. } => 1.0 / (hi - lo),
            Law1D::AreaUniform { .. } => 2.0 * x / (hi * hi - lo * lo),
            Law1D::Point(_) => 0.0,
        }
    }

    /// Inverse CDF, used by Monte Carlo oracles.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Law1D::Uniform { lo, hi } => lo + u * (hi - lo),
            Law1D::AreaUniform { lo, hi } => (lo * lo + u * (hi * hi - lo * lo)).sqrt(),
            Law1D::Point(x) => x,
        }
    }

    /// `E[f(X)]`. `breaks` are hints where `f` changes quickly.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64], tol: f64) -> Result<f64> {
        self.expect_rel(f, breaks, tol, 0.0)
    }

    /// [`Law1D::expect`] for an `f` with relative noise of about `rel`.
    pub fn expect_rel<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64], tol: f64, rel: f64) -> Result<f64> {
        self.validate()?;
        match *self {
            Law1D::Point(x) => Ok(f(x)),
            _ => {
                let (lo, hi) = self.support();
                quadrature_split_rel(|x| f(x) * self.density(x), lo, hi, breaks, tol, rel)
            }
        }
    }
}

/// Eve's distance and AoA laws implied by a scenario.
///
/// The ring and inside scenarios draw the angle uniformly over the
/// half-plane; the inside scenario uses the Alice deployment law for the
/// radius.
pub fn eve_laws(scenario: &EveScenario, dep: &Deployment) -> Result<(Law1D, Law1D)> {
    scenario.validate(dep)?;
    let aoa = Law1D::Uniform { lo: 0.0, hi: 180.0 };
    match *scenario {
        EveScenario::OutsideRing { k, epsilon } => {
            Ok((Law1D::Uniform { lo: dep.d0 + epsilon, hi: k * dep.d0 }, aoa))
        }
        EveScenario::InsideUniform => Ok((Law1D::AreaUniform { lo: dep.d_min, hi: dep.d0 }, aoa)),
        _ => {
            let p = scenario
                .deterministic_position(dep)?
                .ok_or_else(|| contract("scenario has no fixed position"))?;
            Ok((Law1D::Point(p.distance), Law1D::Point(p.aoa)))
        }
    }
}

/// The distance prior written into the Test-2(b) missed-detection integral:
/// uniform on `[d_min, k d0]`.
pub fn verbatim_distance_prior(dep: &Deployment, k: f64) -> Law1D {
    Law1D::Uniform { lo: dep.d_min, hi: k * dep.d0 }
}

/// Standard deviation of Eve's distance estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EveSigma {
    Constant(f64),
    /// Depends on Eve's range through the pathloss.
    Range(RangeSigma),
}

/// Measurement noise.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaModel {
    /// One deviation for every feature of every node (m and degrees).
    Awgn { sigma: f64 },
    /// Per-node distance deviations; no AoA.
    PerNode { alice: Vec<f64>, eve: EveSigma },
}

impl SigmaModel {
    fn check(s: f64) -> Result<f64> {
        if s > 0.0 && s.is_finite() {
            Ok(s)
        } else {
            Err(domain(format!("noise deviation must be positive and finite, got {s}")))
        }
    }

    /// Distance deviation of Alice `i`.
    pub fn alice(&self, i: usize) -> Result<f64> {
        match self {
            SigmaModel::Awgn { sigma } => Self::check(*sigma),
            SigmaModel::PerNode { alice, .. } => alice
                .get(i)
                .copied()
                .ok_or_else(|| contract(format!("no deviation for node {i}")))
                .and_then(Self::check),
        }
    }

    /// Distance deviation of Eve at range `d`.
    pub fn eve(&self, d: f64) -> Result<f64> {
        match self {
            SigmaModel::Awgn { sigma } | SigmaModel::PerNode { eve: EveSigma::Constant(sigma), .. } => {
                Self::check(*sigma)
            }
            SigmaModel::PerNode { eve: EveSigma::Range(r), .. } => Self::check(r.sigma(d)?),
        }
    }

    /// AoA deviation (degrees).
    pub fn aoa(&self) -> Result<f64> {
        match self {
            SigmaModel::Awgn { sigma } => Self::check(*sigma),
            SigmaModel::PerNode { .. } => Err(contract("the ranging noise model has no AoA deviation")),
        }
    }

    /// The same model with every deviation multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::check(s)?;
        Ok(match self {
            SigmaModel::Awgn { sigma } => SigmaModel::Awgn { sigma: sigma * s },
            SigmaModel::PerNode { alice, eve } => SigmaModel::PerNode {
                alice: alice.iter().map(|a| a * s).collect(),
                eve: match eve {
                    EveSigma::Constant(c) => EveSigma::Constant(c * s),
                    // sigma_d scales as SNR^-1/2.
                    EveSigma::Range(r) => EveSigma::Range(RangeSigma { snr: r.snr / (s * s), ..*r }),
                },
            },
        })
    }
}

/// Everything a closed-form probability needs.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticContext {
    pub d: Vec<f64>,
    pub theta: Vec<f64>,
    pub d0: f64,
    pub d_min: f64,
    pub eve_distance: Law1D,
    pub eve_aoa: Law1D,
    pub sigma: SigmaModel,
}

impl AnalyticContext {
    pub fn new(dep: &Deployment, scenario: &EveScenario, sigma: SigmaModel) -> Result<Self> {
        dep.validate()?;
        let (eve_distance, eve_aoa) = eve_laws(scenario, dep)?;
        let ctx = Self {
            d: dep.alice.iter().map(|a| a.distance).collect(),
            theta: dep.alice.iter().map(|a| a.aoa).collect(),
            d0: dep.d0,
            d_min: dep.d_min,
            eve_distance,
            eve_aoa,
            sigma,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn with_eve_distance(mut self, law: Law1D) -> Self {
        self.eve_distance = law;
        self
    }

    pub fn with_sigma(mut self, sigma: SigmaModel) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn m(&self) -> usize {
        self.d.len()
    }

    /// `1 / (M + 1)`, the prior of every occupant under equal priors.
    pub fn prior(&self) -> f64 {
        1.0 / (self.m() as f64 + 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d.is_empty() {
            return Err(domain("M must be at least 1"));
        }
        if self.theta.len() != self.d.len() {
            return Err(contract(format!("{} distances but {} angles", self.d.len(), self.theta.len())));
        }
        if let SigmaModel::PerNode { alice, .. } = &self.sigma {
            if alice.len() != self.d.len() {
                return Err(contract(format!("{} node deviations for M = {}", alice.len(), self.d.len())));
            }
        }
        self.eve_distance.validate()?;
        self.eve_aoa.validate()
    }
}
