//! Error probabilities of the nearest-neighbour tests as actually run.
//!
//! The per-node forms treat each node's acceptance region on its own. The
//! detector accepts a measurement when it falls in the union of all regions
//! and identifies by the nearest node with unbounded outer cells. These
//! versions follow the detector exactly; they coincide with the per-node
//! ones when the regions and cells are well separated.

use crate::analytic::context::{AnalyticContext, Law1D};
use crate::analytic::formulas::{
    misclassification_from_cells, Feature, Misclassification, INTEGRAL_TOL,
};
use crate::analytic::qfunc::{normal_interval, q_func};
use crate::error::{domain, Result};

/// Union of `[c - eps, c + eps]` as sorted disjoint intervals.
pub fn merged_regions(centres: &[f64], eps: f64) -> Vec<(f64, f64)> {
    let mut iv: Vec<(f64, f64)> = centres.iter().map(|&c| (c - eps, c + eps)).collect();
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// `P(x + sigma N in U)`.
fn mass_inside(regions: &[(f64, f64)], x: f64, s: f64) -> f64 {
    regions.iter().map(|&(a, b)| normal_interval((a - x) / s, (b - x) / s)).sum()
}

/// `P(x + sigma N not in U)`, summed over the gaps so small values keep
/// their precision.
fn mass_outside(regions: &[(f64, f64)], x: f64, s: f64) -> f64 {
    let mut total = q_func((x - regions[0].0) / s);
    for w in regions.windows(2) {
        total += normal_interval((w[0].1 - x) / s, (w[1].0 - x) / s);
    }
    total + q_func((regions[regions.len() - 1].1 - x) / s)
}

fn check(eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(domain(format!("threshold must be positive, got {eps}")));
    }
    Ok(())
}

fn pfa(ctx: &AnalyticContext, values: &[f64], eps: f64, sigma: impl Fn(usize) -> Result<f64>) -> Result<f64> {
    ctx.validate()?;
    check(eps)?;
    let regions = merged_regions(values, eps);
    let mut total = 0.0;
    for (i, &x) in values.iter().enumerate() {
        total += mass_outside(&regions, x, sigma(i)?);
    }
    Ok(ctx.prior() * total)
}

fn pmd(law: &Law1D, values: &[f64], eps: f64, sigma: impl Fn(f64) -> f64, prior: f64) -> Result<f64> {
    check(eps)?;
    let regions = merged_regions(values, eps);
    let mut breaks = Vec::new();
    for &(a, b) in &regions {
        for c in [a, b] {
            let w = sigma(c);
            let mut s = w;
            breaks.push(c);
            for _ in 0..7 {
                breaks.push(c - s);
                breaks.push(c + s);
                s *= 2.0;
            }
        }
    }
    let v = law.expect(|x| mass_inside(&regions, x, sigma(x)), &breaks, INTEGRAL_TOL)?;
    if v.is_nan() {
        return Err(domain("noise deviation undefined on Eve's support"));
    }
    Ok(prior * v)
}

/// Joint `P_fa` of the distance outlier test on the union of regions.
pub fn pfa_test2b_exact(ctx: &AnalyticContext, eps_d: f64) -> Result<f64> {
    pfa(ctx, &ctx.d, eps_d, |i| ctx.sigma.alice(i))
}

/// Joint `P_md` of the distance outlier test on the union of regions.
pub fn pmd_bar_test2b_exact(ctx: &AnalyticContext, eps_d: f64) -> Result<f64> {
    ctx.validate()?;
    let sigma = |x: f64| ctx.sigma.eve(x).unwrap_or(f64::NAN);
    pmd(&ctx.eve_distance, &ctx.d, eps_d, sigma, ctx.prior())
}

pub fn pfa_test2c_exact(ctx: &AnalyticContext, eps_theta: f64) -> Result<f64> {
    let s = ctx.sigma.aoa()?;
    pfa(ctx, &ctx.theta, eps_theta, |_| Ok(s))
}

pub fn pmd_bar_test2c_exact(ctx: &AnalyticContext, eps_theta: f64) -> Result<f64> {
    ctx.validate()?;
    let s = ctx.sigma.aoa()?;
    pmd(&ctx.eve_aoa, &ctx.theta, eps_theta, |_| s, ctx.prior())
}

/// Misclassification with unbounded outer cells, as the nearest-neighbour
/// rule has no edge of its own.
pub fn pe_misclassification_exact(ctx: &AnalyticContext, feature: Feature) -> Result<Misclassification> {
    misclassification_from_cells(ctx, feature, (f64::NEG_INFINITY, f64::INFINITY))
}

/// Total measure of the union of regions, for reference.
pub fn union_length(centres: &[f64], eps: f64) -> f64 {
    merged_regions(centres, eps).iter().map(|(a, b)| b - a).sum()
}
