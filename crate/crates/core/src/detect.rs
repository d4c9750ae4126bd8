//! The two-step impersonation detector and transmitter identification.
//!
//! Step 1 is a distance-bounding test against the trusted-zone radius. Step
//! 2 runs nearest-neighbour matches of the measured position, distance and
//! angle against the legitimate fingerprints, each followed by an outlier
//! test on the residual, and fuses them. The final decision is the AND of
//! both steps. When the sender is accepted, the three nearest-neighbour
//! indices vote on its identity.
//!
//! Residuals equal to a threshold, and `z == d0`, count as H0.

use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Result};
use crate::geometry::{GroundTruth, Point};

/// H0: the sender is a legitimate node. H1: impersonation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub fn is_h0(self) -> bool {
        self == Hypothesis::H0
    }

    /// The decision bit `b`: 0 for H0, 1 for H1.
    pub fn bit(self) -> u8 {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }
}

/// Observables of one slot at the sink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    /// Distance estimate (m).
    pub z: f64,
    /// Angle-of-arrival estimate (degrees).
    pub y: Option<f64>,
    /// `z exp(j y)` as a planar point.
    pub p_hat: Option<Point>,
}

impl Measurement {
    pub fn full(z: f64, y: f64) -> Self {
        let t = y.to_radians();
        Self { z, y: Some(y), p_hat: Some(Point { x: z * t.cos(), y: z * t.sin() }) }
    }

    pub fn distance_only(z: f64) -> Self {
        Self { z, y: None, p_hat: None }
    }
}

/// Trusted-zone radius and proximity-region sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub d0: f64,
    /// Position disc radius (m).
    pub eps_p: f64,
    /// Distance half-ring half-width (m).
    pub eps_d: f64,
    /// AoA cone half-width (degrees).
    pub eps_theta: f64,
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("d0", self.d0), ("eps_p", self.eps_p), ("eps_d", self.eps_d), ("eps_theta", self.eps_theta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("thresholds.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMode {
    /// Position, distance and AoA tests.
    #[default]
    Full,
    /// Distance as the only step-2 feature.
    DistanceOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionRule {
    /// Accept only if every test accepts.
    #[default]
    And,
    /// Accept if any test accepts.
    Or,
    /// Majority vote.
    #[serde(rename = "mv")]
    Majority,
}

impl FusionRule {
    pub const ALL: [FusionRule; 3] = [FusionRule::And, FusionRule::Or, FusionRule::Majority];

    pub fn label(self) -> &'static str {
        match self {
            FusionRule::And => "and",
            FusionRule::Or => "or",
            FusionRule::Majority => "mv",
        }
    }
}

/// Who actually transmitted in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Occupant {
    Alice(usize),
    Eve,
}

/// Nearest-neighbour residual, its argmin and the outlier decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubTest {
    pub stat: f64,
    pub index: usize,
    pub decision: Hypothesis,
}

/// Step-2 decisions under each fusion rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusedDecisions {
    pub and: Hypothesis,
    pub or: Hypothesis,
    pub mv: Hypothesis,
}

impl FusedDecisions {
    pub fn get(&self, rule: FusionRule) -> Hypothesis {
        match rule {
            FusionRule::And => self.and,
            FusionRule::Or => self.or,
            FusionRule::Majority => self.mv,
        }
    }

    /// `H0(AND) ⊆ H0(MV) ⊆ H0(OR)` for this slot.
    pub fn inclusions_hold(&self) -> bool {
        (!self.and.is_h0() || self.mv.is_h0()) && (!self.mv.is_h0() || self.or.is_h0())
    }
}

/// Everything the detector decided in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRecord {
    pub truth: Occupant,
    pub step1: Hypothesis,
    /// Position test (full mode only).
    pub position: Option<SubTest>,
    pub distance: SubTest,
    /// AoA test (full mode only).
    pub aoa: Option<SubTest>,
    /// All three fusion rules (full mode only).
    pub fused: Option<FusedDecisions>,
    /// Step-2 decision under the configured rule.
    pub step2: Hypothesis,
    /// Final decision `b`.
    pub final_decision: Hypothesis,
    /// Identified node, present exactly when the final decision is H0.
    pub identified: Option<usize>,
}

impl DecisionRecord {
    pub const CSV_HEADER: [&'static str; 17] = [
        "truth", "step1", "j_star", "i_p", "test_p", "k_star", "i_d", "test_d", "l_star", "i_theta",
        "test_theta", "fuse_and", "fuse_or", "fuse_mv", "step2", "final", "identified",
    ];

    /// Fields in [`DecisionRecord::CSV_HEADER`] order; absent values are
    /// empty strings.
    pub fn csv_fields(&self) -> Vec<String> {
        fn h(x: Hypothesis) -> String {
            x.bit().to_string()
        }
        fn sub(t: Option<SubTest>) -> [String; 3] {
            match t {
                Some(t) => [t.stat.to_string(), t.index.to_string(), h(t.decision)],
                None => Default::default(),
            }
        }
        let truth = match self.truth {
            Occupant::Alice(i) => i.to_string(),
            Occupant::Eve => "eve".to_string(),
        };
        let mut out = vec![truth, h(self.step1)];
        out.extend(sub(self.position));
        out.extend(sub(Some(self.distance)));
        out.extend(sub(self.aoa));
        match self.fused {
            Some(f) => out.extend([h(f.and), h(f.or), h(f.mv)]),
            None => out.extend([String::new(), String::new(), String::new()]),
        }
        out.push(h(self.step2));
        out.push(h(self.final_decision));
        out.push(self.identified.map(|i| i.to_string()).unwrap_or_default());
        out
    }
}

/// H1 iff `z > d0`.
pub fn test1_distance_bounding(z: f64, d0: f64) -> Hypothesis {
    if z > d0 {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

/// Smallest value of `cost` over `0..n` with its first argmin.
fn argmin(n: usize, cost: impl Fn(usize) -> f64) -> Result<(f64, usize)> {
    if n == 0 {
        return Err(contract("fingerprint vector is empty"));
    }
    let mut best = (cost(0), 0);
    for i in 1..n {
        let c = cost(i);
        if c < best.0 {
            best = (c, i);
        }
    }
    Ok(best)
}

/// `J* = min_i |p_hat - p_i|` and its argmin.
pub fn nn_position(p_hat: &Point, p: &[Point]) -> Result<(f64, usize)> {
    argmin(p.len(), |i| p_hat.distance_to(&p[i]))
}

/// `K* = min_i |z - d_i|` and its argmin.
pub fn nn_distance(z: f64, d: &[f64]) -> Result<(f64, usize)> {
    argmin(d.len(), |i| (z - d[i]).abs())
}

/// `L* = min_i |y - theta_i|` on the real line (no wrap-around).
pub fn nn_aoa(y: f64, theta: &[f64]) -> Result<(f64, usize)> {
    argmin(theta.len(), |i| (y - theta[i]).abs())
}

/// H1 iff the residual exceeds the threshold.
pub fn bh_outlier(stat: f64, eps: f64) -> Hypothesis {
    if stat > eps {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

pub fn fuse_step2(decisions: [Hypothesis; 3], rule: FusionRule) -> Hypothesis {
    let accepts = decisions.iter().filter(|d| d.is_h0()).count();
    let accepted = match rule {
        FusionRule::And => accepts == 3,
        FusionRule::Or => accepts >= 1,
        FusionRule::Majority => accepts >= 2,
    };
    if accepted {
        Hypothesis::H0
    } else {
        Hypothesis::H1
    }
}

/// Final decision: accept only if both steps accept.
pub fn fuse_steps(step1: Hypothesis, step2: Hypothesis) -> Hypothesis {
    if step1.is_h0() && step2.is_h0() {
        Hypothesis::H0
    } else {
        Hypothesis::H1
    }
}

/// Majority of the three indices; the position index when all differ.
pub fn identify(i_p: usize, i_d: usize, i_theta: usize) -> usize {
    if i_d == i_theta {
        i_d
    } else {
        i_p
    }
}

fn sub_test(found: (f64, usize), eps: f64) -> SubTest {
    SubTest { stat: found.0, index: found.1, decision: bh_outlier(found.0, eps) }
}

/// Runs the whole detector on one measurement.
pub fn algorithm1(
    m: &Measurement,
    truth: &GroundTruth,
    th: &Thresholds,
    mode: DetectionMode,
    step2_rule: FusionRule,
    occupant: Occupant,
) -> Result<DecisionRecord> {
    let step1 = test1_distance_bounding(m.z, th.d0);
    let distance = sub_test(nn_distance(m.z, &truth.d)?, th.eps_d);
    let (position, aoa, fused, step2, id) = match mode {
        DetectionMode::DistanceOnly => (None, None, None, distance.decision, distance.index),
        DetectionMode::Full => {
            let (y, p_hat) = match (m.y, m.p_hat) {
                (Some(y), Some(p)) => (y, p),
                _ => return Err(contract("full detection mode needs the AoA and position estimates")),
            };
            let position = sub_test(nn_position(&p_hat, &truth.p)?, th.eps_p);
            let aoa = sub_test(nn_aoa(y, &truth.theta)?, th.eps_theta);
            let d = [position.decision, distance.decision, aoa.decision];
            let fused = FusedDecisions {
                and: fuse_step2(d, FusionRule::And),
                or: fuse_step2(d, FusionRule::Or),
                mv: fuse_step2(d, FusionRule::Majority),
            };
            let id = identify(position.index, distance.index, aoa.index);
            (Some(position), Some(aoa), Some(fused), fused.get(step2_rule), id)
        }
    };
    let final_decision = fuse_steps(step1, step2);
    Ok(DecisionRecord {
        truth: occupant,
        step1,
        position,
        distance,
        aoa,
        fused,
        step2,
        final_decision,
        identified: final_decision.is_h0().then_some(id),
    })
}
