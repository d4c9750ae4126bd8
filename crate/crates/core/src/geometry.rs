//! Node placement in the trusted half-disc and Eve placement.
//!
//! Angles are in degrees, counter-clockwise from the positive horizontal
//! axis. All nodes live in the half-plane `aoa in [0, 180]`.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Polar position relative to the sink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarPosition {
    /// Meters from the sink.
    pub distance: f64,
    /// Degrees, in `[0, 180]`.
    pub aoa: f64,
}

/// Cartesian point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance_to(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl PolarPosition {
    pub fn new(distance: f64, aoa: f64) -> Result<Self> {
        let p = Self { distance, aoa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance >= 0.0 && self.distance.is_finite()) {
            return Err(domain(format!("distance must be finite and >= 0, got {}", self.distance)));
        }
        if !(0.0..=180.0).contains(&self.aoa) {
            return Err(domain(format!("aoa must lie in [0, 180] degrees, got {}", self.aoa)));
        }
        Ok(())
    }

    pub fn to_point(&self) -> Point {
        let t = self.aoa.to_radians();
        Point { x: self.distance * t.cos(), y: self.distance * t.sin() }
    }

    /// Inverse of [`PolarPosition::to_point`] on the upper half-plane.
    pub fn from_point(p: &Point) -> Self {
        Self { distance: p.x.hypot(p.y), aoa: p.y.atan2(p.x).to_degrees() }
    }
}

/// The legitimate nodes and the trusted zone they live in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    /// Trusted-zone radius (m).
    pub d0: f64,
    /// Minimum node distance (m).
    pub d_min: f64,
    pub alice: Vec<PolarPosition>,
}

impl Deployment {
    pub fn new(d0: f64, d_min: f64, alice: Vec<PolarPosition>) -> Result<Self> {
        let dep = Self { d0, d_min, alice };
        dep.validate()?;
        Ok(dep)
    }

    /// Random area-uniform deployment of `m` nodes.
    pub fn random<R: Rng + ?Sized>(m: usize, d0: f64, d_min: f64, rng: &mut R) -> Result<Self> {
        let alice = deploy_alice(m, d0, d_min, rng)?;
        Self::new(d0, d_min, alice)
    }

    /// [`Deployment::random`] driven by a ChaCha8 stream seeded with `seed`.
    pub fn seeded(m: usize, d0: f64, d_min: f64, seed: u64) -> Result<Self> {
        Self::random(m, d0, d_min, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn m(&self) -> usize {
        self.alice.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_zone(self.d0, self.d_min)?;
        if self.alice.is_empty() {
            return Err(domain("deployment needs at least one Alice node"));
        }
        for (i, a) in self.alice.iter().enumerate() {
            a.validate()?;
            if a.distance < self.d_min || a.distance > self.d0 {
                return Err(domain(format!(
                    "Alice node {i} at {} m lies outside [d_min, d0] = [{}, {}]",
                    a.distance, self.d_min, self.d0
                )));
            }
        }
        Ok(())
    }
}

fn check_zone(d0: f64, d_min: f64) -> Result<()> {
    if !(d_min >= 0.0 && d0.is_finite() && d_min < d0) {
        return Err(domain(format!("need 0 <= d_min < d0, got d_min = {d_min}, d0 = {d0}")));
    }
    Ok(())
}

/// Where Eve transmits from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EveScenario {
    /// Uniform distance in `(d0 + epsilon, k d0]`, uniform angle.
    OutsideRing { k: f64, epsilon: f64 },
    /// Same law as the Alice nodes.
    InsideUniform,
    /// Same bearing as node `target`, displaced radially.
    WorstCaseAoa { target: usize, radial_offset: f64 },
    /// Same range as node `target`, displaced in angle.
    WorstCaseDistance { target: usize, angular_offset: f64 },
    Fixed { position: PolarPosition },
}

impl EveScenario {
    pub fn validate(&self, dep: &Deployment) -> Result<()> {
        match *self {
            EveScenario::OutsideRing { k, epsilon } => {
                if !(k > 1.0) {
                    return Err(domain(format!("eve.k must exceed 1, got {k}")));
                }
                if !(epsilon > 0.0) {
                    return Err(domain(format!("eve.epsilon must be positive, got {epsilon}")));
                }
                if k * dep.d0 <= dep.d0 + epsilon {
                    return Err(domain(format!(
                        "empty Eve ring: k d0 = {} <= d0 + epsilon = {}",
                        k * dep.d0,
                        dep.d0 + epsilon
                    )));
                }
                Ok(())
            }
            EveScenario::InsideUniform => Ok(()),
            EveScenario::WorstCaseAoa { target, .. } | EveScenario::WorstCaseDistance { target, .. } => {
                if target >= dep.m() {
                    return Err(domain(format!(
                        "eve.target = {target} out of range for M = {}",
                        dep.m()
                    )));
                }
                // Resolve once so offset errors surface at validation time.
                self.deterministic_position(dep).map(|_| ())
            }
            EveScenario::Fixed { position } => position.validate(),
        }
    }

    /// Eve's position for the scenarios that do not need randomness.
    pub fn deterministic_position(&self, dep: &Deployment) -> Result<Option<PolarPosition>> {
        match *self {
            EveScenario::WorstCaseAoa { target, radial_offset } => {
                let t = node(dep, target)?;
                let d = t.distance + radial_offset;
                if d < dep.d_min {
                    return Err(domain(format!(
                        "radial offset {radial_offset} puts Eve at {d} m, below d_min = {}",
                        dep.d_min
                    )));
                }
                // Clamped to the zone edge: the attack only matters inside.
                Ok(Some(PolarPosition { distance: d.min(dep.d0), aoa: t.aoa }))
            }
            EveScenario::WorstCaseDistance { target, angular_offset } => {
                let t = node(dep, target)?;
                let aoa = t.aoa + angular_offset;
                if !(0.0..=180.0).contains(&aoa) {
                    return Err(domain(format!(
                        "angular offset {angular_offset} puts Eve at {aoa} degrees, outside [0, 180]"
                    )));
                }
                Ok(Some(PolarPosition { distance: t.distance, aoa }))
            }
            EveScenario::Fixed { position } => Ok(Some(position)),
            EveScenario::OutsideRing { .. } | EveScenario::InsideUniform => Ok(None),
        }
    }
}

fn node(dep: &Deployment, i: usize) -> Result<PolarPosition> {
    dep.alice
        .get(i)
        .copied()
        .ok_or_else(|| domain(format!("node index {i} out of range for M = {}", dep.m())))
}

fn area_uniform_radius(u: f64, d_min: f64, d0: f64) -> f64 {
    (d_min * d_min + u * (d0 * d0 - d_min * d_min)).sqrt()
}

/// Draws `m` positions uniformly over the half-annulus `d_min <= r <= d0`.
pub fn deploy_alice<R: Rng + ?Sized>(
    m: usize,
    d0: f64,
    d_min: f64,
    rng: &mut R,
) -> Result<Vec<PolarPosition>> {
    if m == 0 {
        return Err(domain("M must be at least 1"));
    }
    check_zone(d0, d_min)?;
    Ok((0..m)
        .map(|_| {
            let u: f64 = rng.random();
            let aoa = rng.random::<f64>() * 180.0;
            PolarPosition { distance: area_uniform_radius(u, d_min, d0), aoa }
        })
        .collect())
}

/// Draws Eve's position for one slot.
pub fn place_eve<R: Rng + ?Sized>(
    scenario: &EveScenario,
    dep: &Deployment,
    rng: &mut R,
) -> Result<PolarPosition> {
    if let Some(p) = scenario.deterministic_position(dep)? {
        return Ok(p);
    }
    match *scenario {
        EveScenario::OutsideRing { k, epsilon } => {
            let lo = dep.d0 + epsilon;
            let hi = k * dep.d0;
            if hi <= lo {
                return Err(domain(format!("empty Eve ring ({lo}, {hi}]")));
            }
            // 1 - u lies in (0, 1], so the draw lands in (lo, hi].
            let u: f64 = rng.random();
            let distance = lo + (1.0 - u) * (hi - lo);
            Ok(PolarPosition { distance, aoa: rng.random::<f64>() * 180.0 })
        }
        EveScenario::InsideUniform => {
            let u: f64 = rng.random();
            let aoa = rng.random::<f64>() * 180.0;
            Ok(PolarPosition { distance: area_uniform_radius(u, dep.d_min, dep.d0), aoa })
        }
        _ => unreachable!("deterministic scenarios handled above"),
    }
}

/// Fingerprint vectors of the legitimate nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Distances (m).
    pub d: Vec<f64>,
    /// Angles of arrival (degrees).
    pub theta: Vec<f64>,
    /// Planar positions.
    pub p: Vec<Point>,
}

impl GroundTruth {
    pub fn m(&self) -> usize {
        self.d.len()
    }
}

pub fn ground_truth(dep: &Deployment) -> GroundTruth {
    GroundTruth {
        d: dep.alice.iter().map(|a| a.distance).collect(),
        theta: dep.alice.iter().map(|a| a.aoa).collect(),
        p: dep.alice.iter().map(PolarPosition::to_point).collect(),
    }
}
