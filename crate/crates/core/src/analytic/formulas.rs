//! Closed-form error probabilities, one acceptance region per node.
//!
//! Every value here is a joint probability under equal priors: each term
//! carries the occupant prior `1/(M+1)`. [`Normalization`] converts them to
//! rates conditioned on the occupant, which is what a Monte Carlo run over
//! Alice-only or Eve-only slots measures.

use crate::analytic::context::{AnalyticContext, Law1D};
use crate::analytic::qfunc::{ln_add, ln_normal_interval, ln_q, q_func};
use crate::error::{domain, Result};

/// Absolute tolerance for the expectation integrals.
pub const INTEGRAL_TOL: f64 = 1e-10;

/// Shift applied to repeated feature values before sorting.
pub const TIE_PERTURBATION: f64 = 1e-9;

/// How an error probability is normalized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Weighted by the occupant prior `1/(M+1)`.
    Joint,
    /// Conditioned on the occupant class: `P_fa` given Alice, `P_md` given
    /// Eve, `P_e` given Alice.
    #[default]
    Conditional,
}

impl Normalization {
    /// False alarm and misclassification: Alice has total prior `M/(M+1)`.
    pub fn alice_rate(self, joint: f64, m: usize) -> f64 {
        match self {
            Normalization::Joint => joint,
            Normalization::Conditional => joint * (m as f64 + 1.0) / m as f64,
        }
    }

    /// Missed detection: Eve has prior `1/(M+1)`.
    pub fn eve_rate(self, joint: f64, m: usize) -> f64 {
        match self {
            Normalization::Joint => joint,
            Normalization::Conditional => joint * (m as f64 + 1.0),
        }
    }
}

/// Fingerprint used by a nearest-neighbour test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    Distance,
    Aoa,
}

fn ln_prior(ctx: &AnalyticContext) -> f64 {
    -(ctx.m() as f64 + 1.0).ln()
}

fn ln_sum(terms: impl Iterator<Item = f64>) -> f64 {
    terms.fold(f64::NEG_INFINITY, ln_add)
}

/// Break points `c +- w 2^k` around each feature location, so the adaptive
/// rule sees the Gaussian edges even when they are much narrower than the
/// support.
fn edge_breaks(centres: &[(f64, f64)]) -> Vec<f64> {
    let mut out = Vec::with_capacity(centres.len() * 15);
    for &(c, w) in centres {
        out.push(c);
        let mut s = w;
        for _ in 0..7 {
            out.push(c - s);
            out.push(c + s);
            s *= 2.0;
        }
    }
    out
}

/// `ln E[exp(ln_f(X))]` for `X` under `law`, scaled by the grid peak so deep
/// tails do not underflow. `peak_width(x)` is the scale on which `ln_f`
/// changes by about one near `x`; `edges` lists `(location, width)` of fast
/// transitions.
fn ln_expect(
    law: &Law1D,
    ln_f: impl Fn(f64) -> f64,
    peak_width: impl Fn(f64) -> f64,
    edges: &[(f64, f64)],
) -> Result<f64> {
    law.validate()?;
    if let Law1D::Point(x) = *law {
        return Ok(ln_f(x));
    }
    let (lo, hi) = law.support();
    const GRID: usize = 256;
    let mut peak = (f64::NEG_INFINITY, lo);
    for j in 0..=GRID {
        let x = lo + (hi - lo) * j as f64 / GRID as f64;
        let v = ln_f(x);
        if v.is_nan() {
            return Err(domain(format!("noise deviation undefined at {x}")));
        }
        if v > peak.0 {
            peak = (v, x);
        }
    }
    if peak.0 == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let (c, xs) = peak;
    let mut centres: Vec<(f64, f64)> = edges.to_vec();
    centres.push((xs, peak_width(xs)));
    let mut breaks = edge_breaks(&centres);
    breaks.extend((1..GRID).map(|j| lo + (hi - lo) * j as f64 / GRID as f64));
    // ln_f carries absolute rounding error of order |c| ulp, which becomes
    // relative error after exponentiation.
    let noise = 64.0 * f64::EPSILON * c.abs().max(1.0);
    let scaled = law.expect_rel(|x| (ln_f(x) - c).exp(), &breaks, 1e-13, noise)?;
    if scaled.is_nan() {
        return Err(domain("noise deviation undefined on the support"));
    }
    Ok(c + scaled.ln())
}

/// `ln E[Q(u(X))]` for `X` under `law`.
pub(crate) fn ln_expect_q(
    law: &Law1D,
    u: impl Fn(f64) -> f64,
    width: impl Fn(f64) -> f64,
    edges: &[(f64, f64)],
) -> Result<f64> {
    // ln Q(u) falls off at rate about max(u, 1) / sigma away from the peak.
    ln_expect(law, |x| ln_q(u(x)), |x| width(x) / u(x).abs().max(1.0), edges)
}

fn check_inside(ctx: &AnalyticContext) -> Result<()> {
    if let Some(d) = ctx.d.iter().find(|&&d| d > ctx.d0) {
        return Err(domain(format!("node at {d} m lies outside the trusted zone d0 = {}", ctx.d0)));
    }
    Ok(())
}

/// `ln P_fa` of the distance-bounding test.
pub fn ln_pfa_test1(ctx: &AnalyticContext) -> Result<f64> {
    ctx.validate()?;
    check_inside(ctx)?;
    let terms = (0..ctx.m())
        .map(|i| Ok(ln_q((ctx.d0 - ctx.d[i]) / ctx.sigma.alice(i)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ln_prior(ctx) + ln_sum(terms.into_iter()))
}

/// `(1/(M+1)) sum_i Q((d0 - d_i) / sigma_i)`.
pub fn pfa_test1(ctx: &AnalyticContext) -> Result<f64> {
    ln_pfa_test1(ctx).map(f64::exp)
}

/// `ln P_md` of the distance-bounding test.
pub fn ln_pmd_bar_test1(ctx: &AnalyticContext) -> Result<f64> {
    ctx.validate()?;
    let d0 = ctx.d0;
    let sigma = |x: f64| ctx.sigma.eve(x).unwrap_or(f64::NAN);
    // Eve passes when her estimate falls at or below d0.
    let ln_e = ln_expect_q(&ctx.eve_distance, |x| (x - d0) / sigma(x), sigma, &[(d0, sigma(d0))])?;
    Ok(ln_prior(ctx) + ln_e)
}

/// `(1/(M+1)) E[1 - Q((d0 - d_E) / sigma(d_E))]` over Eve's range law.
pub fn pmd_bar_test1(ctx: &AnalyticContext) -> Result<f64> {
    ln_pmd_bar_test1(ctx).map(f64::exp)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(domain(format!("threshold must be positive, got {eps}")));
    }
    Ok(())
}

fn ln_pfa_bh(ctx: &AnalyticContext, eps: f64, sigma: impl Fn(usize) -> Result<f64>) -> Result<f64> {
    ctx.validate()?;
    check_eps(eps)?;
    let terms = (0..ctx.m())
        .map(|i| Ok(2f64.ln() + ln_q(eps / sigma(i)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ln_prior(ctx) + ln_sum(terms.into_iter()))
}

/// `ln P_fa` of the distance outlier test.
pub fn ln_pfa_test2b(ctx: &AnalyticContext, eps_d: f64) -> Result<f64> {
    ln_pfa_bh(ctx, eps_d, |i| ctx.sigma.alice(i))
}

/// `(1/(M+1)) sum_i 2 Q(eps_d / sigma_i)`; `(2M/(M+1)) Q(eps_d/sigma)` for a
/// common deviation.
pub fn pfa_test2b(ctx: &AnalyticContext, eps_d: f64) -> Result<f64> {
    ln_pfa_test2b(ctx, eps_d).map(f64::exp)
}

/// `ln P_fa` of the AoA outlier test.
pub fn ln_pfa_test2c(ctx: &AnalyticContext, eps_theta: f64) -> Result<f64> {
    let s = ctx.sigma.aoa()?;
    ln_pfa_bh(ctx, eps_theta, |_| Ok(s))
}

pub fn pfa_test2c(ctx: &AnalyticContext, eps_theta: f64) -> Result<f64> {
    ln_pfa_test2c(ctx, eps_theta).map(f64::exp)
}

/// `ln E[sum_i P(|x_i - X_E| <= eps)]`, summed per node, not merged.
fn ln_pr_mass_sum(law: &Law1D, centres: &[f64], eps: f64, sigma: impl Fn(f64) -> f64) -> Result<f64> {
    let edges: Vec<(f64, f64)> = centres
        .iter()
        .flat_map(|&c| [(c - eps, sigma(c - eps)), (c + eps, sigma(c + eps))])
        .collect();
    let ln_f = |x: f64| {
        let s = sigma(x);
        ln_sum(centres.iter().map(|&c| ln_normal_interval((c - eps - x) / s, (c + eps - x) / s)))
    };
    let peak_width = |x: f64| {
        let s = sigma(x);
        let gap = centres.iter().map(|&c| ((x - c).abs() - eps).max(0.0)).fold(f64::INFINITY, f64::min);
        s / (gap / s).max(1.0)
    };
    ln_expect(law, ln_f, peak_width, &edges)
}

/// `ln P_md` of the distance outlier test.
pub fn ln_pmd_bar_test2b(ctx: &AnalyticContext, eps_d: f64) -> Result<f64> {
    ctx.validate()?;
    if eps_d == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    check_eps(eps_d)?;
    let sigma = |x: f64| ctx.sigma.eve(x).unwrap_or(f64::NAN);
    Ok(ln_prior(ctx) + ln_pr_mass_sum(&ctx.eve_distance, &ctx.d, eps_d, sigma)?)
}

/// `(1/(M+1)) E[sum_i (Q((d_i - eps - d_E)/sigma) - Q((d_i + eps - d_E)/sigma))]`
/// over Eve's range law. `eps_d = 0` gives zero.
pub fn pmd_bar_test2b(ctx: &AnalyticContext, eps_d: f64) -> Result<f64> {
    ln_pmd_bar_test2b(ctx, eps_d).map(f64::exp)
}

/// `ln P_md` of the AoA outlier test.
pub fn ln_pmd_bar_test2c(ctx: &AnalyticContext, eps_theta: f64) -> Result<f64> {
    ctx.validate()?;
    let s = ctx.sigma.aoa()?;
    if eps_theta == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    check_eps(eps_theta)?;
    Ok(ln_prior(ctx) + ln_pr_mass_sum(&ctx.eve_aoa, &ctx.theta, eps_theta, |_| s)?)
}

/// AoA analog of [`pmd_bar_test2b`] over Eve's angle law.
pub fn pmd_bar_test2c(ctx: &AnalyticContext, eps_theta: f64) -> Result<f64> {
    ln_pmd_bar_test2c(ctx, eps_theta).map(f64::exp)
}

/// Misclassification probability and the per-node terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Misclassification {
    /// `sum_i P_{e|i} / (M+1)`.
    pub total: f64,
    /// `P_{e|i}` in node order.
    pub per_node: Vec<f64>,
}

/// Ascending order of `values`, with exact repeats nudged apart by
/// [`TIE_PERTURBATION`] per repeat.
pub(crate) fn sorted_distinct(values: &[f64]) -> Result<Vec<(usize, f64)>> {
    let mut v: Vec<(usize, f64)> = values.iter().copied().enumerate().collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut run = 0.0;
    for j in 1..v.len() {
        if v[j].1 == values[v[j - 1].0] {
            run += 1.0;
            v[j].1 += run * TIE_PERTURBATION;
        } else {
            run = 0.0;
        }
    }
    for w in v.windows(2) {
        if !(w[1].1 > w[0].1) {
            return Err(domain(format!("feature values {} and {} cannot be separated", w[0].1, w[1].1)));
        }
    }
    Ok(v)
}

/// Nearest-neighbour cells `(lower, upper)` in sorted order, bounded by
/// `outer` at both ends.
pub(crate) fn cells(sorted: &[(usize, f64)], outer: (f64, f64)) -> Vec<(f64, f64)> {
    let n = sorted.len();
    (0..n)
        .map(|j| {
            let lo = if j == 0 { outer.0 } else { 0.5 * (sorted[j - 1].1 + sorted[j].1) };
            let hi = if j + 1 == n { outer.1 } else { 0.5 * (sorted[j].1 + sorted[j + 1].1) };
            (lo, hi)
        })
        .collect()
}

/// Per-node error given the cells: `Q((x - l)/sigma) + Q((u - x)/sigma)`,
/// which equals `1 - (Q((l - x)/sigma) - Q((u - x)/sigma))` without the
/// cancellation.
pub(crate) fn misclassification_from_cells(
    ctx: &AnalyticContext,
    feature: Feature,
    outer: (f64, f64),
) -> Result<Misclassification> {
    ctx.validate()?;
    let values = match feature {
        Feature::Distance => &ctx.d,
        Feature::Aoa => &ctx.theta,
    };
    let sorted = sorted_distinct(values)?;
    let bounds = cells(&sorted, outer);
    let mut per_node = vec![0.0; ctx.m()];
    for (&(i, x), &(l, u)) in sorted.iter().zip(&bounds) {
        let s = match feature {
            Feature::Distance => ctx.sigma.alice(i)?,
            Feature::Aoa => ctx.sigma.aoa()?,
        };
        per_node[i] = (q_func((x - l) / s) + q_func((u - x) / s)).min(1.0);
    }
    let total = ctx.prior() * per_node.iter().sum::<f64>();
    Ok(Misclassification { total, per_node })
}

/// Misclassification of the nearest-neighbour identification by one
/// feature. Outer cell edges are `d_min` and `d0` for distance and 0 and 180
/// degrees for the angle.
pub fn pe_misclassification(ctx: &AnalyticContext, feature: Feature) -> Result<Misclassification> {
    let outer = match feature {
        Feature::Distance => (ctx.d_min, ctx.d0),
        Feature::Aoa => (0.0, 180.0),
    };
    misclassification_from_cells(ctx, feature, outer)
}
