use rayon::prelude::*;

use crate::curve::{ErrorRateCurve, RatePoint, Source};
use crate::detect::{DecisionRecord, DetectionMode, FusionRule};
use crate::error::{contract, Result};
use crate::sim::counters::PointCounters;
use crate::sim::{run_trial, Experiment};

/// Trials per work item. Fixed so that floating-point sums are reduced in
/// the same order for every worker count.
const CHUNK: u64 = 2048;

/// Knobs that do not change results.
#[derive(Default)]
pub struct SweepOptions<'a> {
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Keep every decision record (memory grows with the trial count).
    pub collect_records: bool,
    /// Called after each SNR point with `(done, total)`.
    pub progress: Option<&'a (dyn Fn(usize, usize) + Sync)>,
}

/// Moments of `z - d_true` over the successful trials of one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DistanceErrorStats {
    pub n: u64,
    sum: [f64; 4],
}

impl DistanceErrorStats {
    fn push(&mut self, e: f64) {
        self.n += 1;
        let mut p = e;
        for s in &mut self.sum {
            *s += p;
            p *= e;
        }
    }

    fn merge(&mut self, o: &Self) {
        self.n += o.n;
        for k in 0..4 {
            self.sum[k] += o.sum[k];
        }
    }

    pub fn mean(&self) -> f64 {
        self.sum[0] / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.n as f64;
        (self.sum[1] - self.sum[0] * self.sum[0] / n) / (n - 1.0)
    }
}

/// Per-point bookkeeping beyond the rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDiagnostics {
    pub snr_db: f64,
    pub n: u64,
    pub flags: u64,
    pub errors: u64,
    pub inclusion_checked: u64,
    pub inclusion_violations: u64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub curves: Vec<ErrorRateCurve>,
    pub counters: Vec<PointCounters>,
    pub diagnostics: Vec<PointDiagnostics>,
    pub distance_errors: Vec<DistanceErrorStats>,
    /// Records per SNR point in trial order, when requested.
    pub records: Option<Vec<Vec<DecisionRecord>>>,
}

impl SweepResult {
    pub fn inclusion_violations(&self) -> u64 {
        self.diagnostics.iter().map(|d| d.inclusion_violations).sum()
    }

    pub fn curve(&self, test: &str, fusion: &str) -> Option<&ErrorRateCurve> {
        self.curves.iter().find(|c| c.test == test && c.fusion == fusion)
    }
}

type Chunk = (PointCounters, DistanceErrorStats, Vec<DecisionRecord>);

fn run_chunk(exp: &Experiment, snr_index: usize, lo: u64, hi: u64, keep: bool) -> Chunk {
    let mut c = PointCounters::default();
    let mut e = DistanceErrorStats::default();
    let mut recs = Vec::new();
    for t in lo..hi {
        match run_trial(exp, snr_index, t) {
            Ok(out) => {
                c.add(&out.record, out.flagged);
                e.push(out.distance_error);
                if keep {
                    recs.push(out.record);
                }
            }
            Err(_) => c.add_error(),
        }
    }
    (c, e, recs)
}

fn sweep_points(exp: &Experiment, opts: &SweepOptions) -> Vec<Chunk> {
    let n = exp.plan.n_trials;
    let total = exp.plan.snr.len();
    (0..total)
        .map(|k| {
            let chunks: Vec<Chunk> = (0..n.div_ceil(CHUNK))
                .into_par_iter()
                .map(|j| run_chunk(exp, k, j * CHUNK, ((j + 1) * CHUNK).min(n), opts.collect_records))
                .collect();
            let mut acc: Chunk = Default::default();
            for (c, e, r) in chunks {
                acc.0.merge(&c);
                acc.1.merge(&e);
                acc.2.extend(r);
            }
            if let Some(p) = opts.progress {
                p(k + 1, total);
            }
            acc
        })
        .collect()
}

/// Runs `n_trials` slots at every SNR point and tallies every curve
/// family.
pub fn run_sweep(exp: &Experiment, opts: &SweepOptions) -> Result<SweepResult> {
    exp.plan.validate()?;
    let points = match opts.workers {
        None => sweep_points(exp, opts),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| contract(format!("cannot start {w} workers: {e}")))?;
            pool.install(|| sweep_points(exp, opts))
        }
    };
    let snr: Vec<f64> = exp.plan.snr.iter().map(|s| s.db).collect();
    let counters: Vec<PointCounters> = points.iter().map(|p| p.0).collect();
    let full = exp.plan.detection_mode == DetectionMode::Full;
    let make = |test: &str, fusion: &str, f: &dyn Fn(&PointCounters, f64) -> RatePoint| ErrorRateCurve {
        scenario_id: exp.scenario_id.clone(),
        source: Source::MonteCarlo,
        test: test.into(),
        fusion: fusion.into(),
        points: counters.iter().zip(&snr).map(|(c, &s)| f(c, s)).collect(),
    };
    let flags = |c: &PointCounters| c.flags + c.errors;
    let mut curves = vec![make("step1", "none", &|c, s| c.step1.rate_point(s, c.n, flags(c), true))];
    if full {
        curves.push(make("position", "none", &|c, s| c.position.rate_point(s, c.n, flags(c), true)));
    }
    curves.push(make("distance", "none", &|c, s| c.distance.rate_point(s, c.n, flags(c), true)));
    if full {
        curves.push(make("aoa", "none", &|c, s| c.aoa.rate_point(s, c.n, flags(c), true)));
        for (k, rule) in FusionRule::ALL.iter().enumerate() {
            curves.push(make("step2", rule.label(), &|c, s| c.fusion[k].rate_point(s, c.n, flags(c), true)));
        }
    }
    let rule = if full { exp.plan.step2_rule.label() } else { "none" };
    curves.push(make("final", rule, &|c, s| c.final_decision.rate_point(s, c.n, flags(c), true)));
    curves.push(make("identification", rule, &|c, s| c.identification.rate_point(s, c.n, flags(c), false)));
    let diagnostics = counters
        .iter()
        .zip(&snr)
        .map(|(c, &s)| PointDiagnostics {
            snr_db: s,
            n: c.n,
            flags: c.flags,
            errors: c.errors,
            inclusion_checked: c.inclusion_checked,
            inclusion_violations: c.inclusion_violations,
        })
        .collect();
    let distance_errors = points.iter().map(|p| p.1).collect();
    let records = opts.collect_records.then(|| points.into_iter().map(|p| p.2).collect());
    Ok(SweepResult { curves, counters, diagnostics, distance_errors, records })
}
