//! The four subcommands as library functions.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use uwauth_core::analytic::{AnalyticForm, AnalyticSweep, Normalization};
use uwauth_core::curve::{ErrorRateCurve, RatePoint};
use uwauth_core::geometry::EveScenario;
use uwauth_core::sim::{
    compare_mc_analytic, run_sweep, ChannelMode, ComparisonReport, Experiment, GatePolicy, SweepOptions,
    SweepResult,
};

use crate::config::{ExperimentConfig, OutputFormat};
use crate::output;
use crate::CliError;

pub const VERSION: &str = env!("UWAUTH_VERSION");

/// Command-line overrides. None of them changes a result except `seed`
/// and `sigma_scale`.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
    /// Multiplies every analytic deviation. Anything but 1 injects a
    /// deliberate convention mismatch into `validate`.
    pub sigma_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { out: None, workers: None, seed: None, format: None, sigma_scale: 1.0 }
    }
}

impl RunOptions {
    fn apply(&self, cfg: &ExperimentConfig) -> Result<ExperimentConfig, CliError> {
        let mut c = cfg.clone();
        if let Some(s) = self.seed {
            c.plan.seed = s;
        }
        if let Some(o) = &self.out {
            c.outputs.dir = o.to_string_lossy().into_owned();
        }
        if let Some(f) = self.format {
            c.outputs.format = f;
        }
        if self.workers == Some(0) {
            return Err(CliError::Validation("--workers must be at least 1".into()));
        }
        if !(self.sigma_scale > 0.0 && self.sigma_scale.is_finite()) {
            return Err(CliError::Validation(format!("sigma scale must be positive, got {}", self.sigma_scale)));
        }
        c.validate()?;
        Ok(c.resolved())
    }
}

#[derive(Debug, Serialize)]
struct PointSummary {
    snr_db: f64,
    trials: u64,
    clamped: u64,
    errors: u64,
    inclusion_checked: u64,
    inclusion_violations: u64,
    distance_error_mean: f64,
    distance_error_variance: f64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    wall_time_s: f64,
    files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<Vec<PointSummary>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<ValidationSummary>,
    config: &'a ExperimentConfig,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct ValidationSummary {
    rows: usize,
    gating_rows: usize,
    flags: usize,
    pass: bool,
}

fn file_names(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect()
}

fn log_resolved(cfg: &ExperimentConfig) {
    for s in cfg.snr_points() {
        log::info!("snr {} dB -> linear {:.6e}, awgn sigma {:.6e}", s.db, s.linear, s.sigma());
    }
    if cfg.channel.mode == ChannelMode::ColoredWaveform {
        let pt = cfg.channel.colored.pt_db;
        log::info!("transmit power {pt} dB re uPa -> linear {:.6e}", 10f64.powf(pt / 10.0));
    }
}

fn experiment(cfg: &ExperimentConfig) -> Result<Experiment, CliError> {
    let exp = Experiment::new(
        cfg.scenario_id.clone(),
        cfg.deployment()?,
        cfg.eve,
        cfg.thresholds(),
        cfg.plan_spec(),
        cfg.link()?,
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;
    for (i, p) in exp.deployment.alice.iter().enumerate() {
        log::debug!("node {i}: d = {:.3} m, aoa = {:.3} deg", p.distance, p.aoa);
    }
    Ok(exp)
}

fn monte_carlo(exp: &Experiment, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult, CliError> {
    let progress = |done: usize, total: usize| log::info!("snr point {done}/{total} done");
    let sweep = SweepOptions { workers: opts.workers, collect_records: cfg.outputs.records, progress: Some(&progress) };
    log::info!("simulating {} trials at {} snr points", cfg.plan.n_trials, cfg.plan.snr_grid_db.len());
    Ok(run_sweep(exp, &sweep)?)
}

fn analytic_sweep<'a>(
    exp: &'a Experiment,
    cfg: &ExperimentConfig,
    normalization: Normalization,
    sigma_scale: f64,
) -> AnalyticSweep<'a> {
    AnalyticSweep {
        scenario_id: exp.scenario_id.clone(),
        deployment: &exp.deployment,
        eve: exp.eve,
        thresholds: exp.thresholds,
        mode: exp.plan.detection_mode,
        link: exp.link(),
        form: cfg.analytic.form,
        normalization,
        sigma_scale,
    }
}

fn summaries(r: &SweepResult) -> Vec<PointSummary> {
    r.diagnostics
        .iter()
        .zip(&r.distance_errors)
        .map(|(d, e)| PointSummary {
            snr_db: d.snr_db,
            trials: d.n,
            clamped: d.flags,
            errors: d.errors,
            inclusion_checked: d.inclusion_checked,
            inclusion_violations: d.inclusion_violations,
            distance_error_mean: e.mean(),
            distance_error_variance: e.variance(),
        })
        .collect()
}

pub struct SimulateOutput {
    pub files: Vec<PathBuf>,
    pub result: SweepResult,
}

/// Runs the Monte Carlo sweep and writes one file per curve family plus a
/// manifest.
pub fn simulate(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SimulateOutput, CliError> {
    let cfg = opts.apply(cfg)?;
    let dir = PathBuf::from(&cfg.outputs.dir);
    output::prepare_dir(&dir)?;
    log_resolved(&cfg);
    let exp = experiment(&cfg)?;
    let start = Instant::now();
    let result = monte_carlo(&exp, &cfg, opts)?;
    let mut files = output::write_curves(&dir, "mc", &result.curves, cfg.outputs.format)?;
    if let Some(recs) = &result.records {
        let p = dir.join("records.csv");
        output::write_records(&p, &cfg.plan.snr_grid_db, recs)?;
        files.push(p);
    }
    let violations = result.inclusion_violations();
    if violations > 0 {
        log::warn!("{violations} slots broke the fusion inclusions");
    }
    let manifest = Manifest {
        command: "simulate",
        version: VERSION,
        seed: cfg.plan.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        files: file_names(&files),
        diagnostics: Some(summaries(&result)),
        validation: None,
        config: &cfg,
    };
    let mp = dir.join("manifest_simulate.json");
    output::write_json(&mp, &manifest)?;
    files.push(mp);
    Ok(SimulateOutput { files, result })
}

pub struct AnalyticOutput {
    pub files: Vec<PathBuf>,
    pub curves: Vec<ErrorRateCurve>,
}

/// Evaluates the closed-form curves on the configured grid.
pub fn analytic(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<AnalyticOutput, CliError> {
    let cfg = opts.apply(cfg)?;
    let dir = PathBuf::from(&cfg.outputs.dir);
    output::prepare_dir(&dir)?;
    log_resolved(&cfg);
    let exp = experiment(&cfg)?;
    let start = Instant::now();
    let curves = analytic_sweep(&exp, &cfg, cfg.analytic.normalization, opts.sigma_scale).curves(&cfg.snr_points())?;
    let mut files = output::write_curves(&dir, "analytic", &curves, cfg.outputs.format)?;
    let manifest = Manifest {
        command: "analytic",
        version: VERSION,
        seed: cfg.plan.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        files: file_names(&files),
        diagnostics: None,
        validation: None,
        config: &cfg,
    };
    let mp = dir.join("manifest_analytic.json");
    output::write_json(&mp, &manifest)?;
    files.push(mp);
    Ok(AnalyticOutput { files, curves })
}

pub struct ValidationOutput {
    pub report: ComparisonReport,
    pub files: Vec<PathBuf>,
}

impl ValidationOutput {
    pub fn pass(&self) -> bool {
        self.report.pass()
    }
}

fn gate_for(cfg: &ExperimentConfig, test: &str) -> GatePolicy {
    let base = match (cfg.analytic.gate_min_snr_db, cfg.channel.mode) {
        (Some(s), _) => GatePolicy::MinSnr(s),
        (None, ChannelMode::AwgnFeatures) => GatePolicy::All,
        // The colored deviation is a bound, not the estimator's law.
        (None, ChannelMode::ColoredWaveform) => GatePolicy::InfoOnly,
    };
    // Per-node cones overlap at low SNR; only the exact union form is
    // expected to match the nearest-neighbour detector there.
    if test == "aoa" && cfg.analytic.form != AnalyticForm::Exact {
        GatePolicy::InfoOnly
    } else {
        base
    }
}

/// Keeps only `p_mc`, for the joint-normalized identification row.
fn only_pmc(c: &ErrorRateCurve) -> ErrorRateCurve {
    let mut c = c.clone();
    for p in &mut c.points {
        *p = RatePoint { p_fa: None, p_md: None, ..p.clone() };
    }
    c
}

fn find<'a>(curves: &'a [ErrorRateCurve], test: &str) -> Result<&'a ErrorRateCurve, CliError> {
    curves
        .iter()
        .find(|c| c.test == test && c.fusion == "none")
        .ok_or_else(|| CliError::Runtime(format!("missing curve {test}")))
}

/// Runs both paths and compares step 1, the distance test and (when
/// available) the AoA test point by point.
pub fn validate(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ValidationOutput, CliError> {
    let cfg = opts.apply(cfg)?;
    let dir = PathBuf::from(&cfg.outputs.dir);
    output::prepare_dir(&dir)?;
    log_resolved(&cfg);
    let exp = experiment(&cfg)?;
    let start = Instant::now();
    let grid = cfg.snr_points();
    let mc = monte_carlo(&exp, &cfg, opts)?;
    let an = analytic_sweep(&exp, &cfg, cfg.analytic.normalization, opts.sigma_scale).curves(&grid)?;
    let mut report = ComparisonReport::default();
    for a in &an {
        let m = find(&mc.curves, &a.test)?;
        report.extend(compare_mc_analytic(m, a, gate_for(&cfg, &a.test))?);
    }
    // Verbatim joint-normalized misclassification, for the record.
    let joint = analytic_sweep(&exp, &cfg, Normalization::Joint, opts.sigma_scale).curves(&grid)?;
    let mut verbatim = compare_mc_analytic(
        &only_pmc(find(&mc.curves, "distance")?),
        &only_pmc(find(&joint, "distance")?),
        GatePolicy::InfoOnly,
    )?;
    for r in &mut verbatim.rows {
        r.rate = "p_mc_joint";
    }
    report.extend(verbatim);
    let vp = dir.join("validation.csv");
    output::write_validation(&vp, &report)?;
    print_report(&report);
    let summary = ValidationSummary {
        rows: report.rows.len(),
        gating_rows: report.rows.iter().filter(|r| r.gating).count(),
        flags: report.flags(),
        pass: report.pass(),
    };
    let mut files = vec![vp];
    let manifest = Manifest {
        command: "validate",
        version: VERSION,
        seed: cfg.plan.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        files: file_names(&files),
        diagnostics: Some(summaries(&mc)),
        validation: Some(summary),
        config: &cfg,
    };
    let mp = dir.join("manifest_validate.json");
    output::write_json(&mp, &manifest)?;
    files.push(mp);
    Ok(ValidationOutput { report, files })
}

fn print_report(report: &ComparisonReport) {
    println!("{:<9} {:>7} {:<10} {:>12} {:>12} {:>10}  result", "test", "snr_db", "rate", "montecarlo", "analytic", "se");
    for r in &report.rows {
        let result = match (r.flagged, r.gating) {
            (false, _) => "pass",
            (true, true) => "FLAG",
            (true, false) => "flag (info)",
        };
        println!(
            "{:<9} {:>7} {:<10} {:>12.6e} {:>12.6e} {:>10.3e}  {result}",
            r.test, r.snr_db, r.rate, r.montecarlo, r.analytic, r.se
        );
    }
    println!("{} gating flags", report.flags());
}

/// Preset configurations for the standard attacker placements.
pub fn scenario_presets() -> Result<Vec<ExperimentConfig>, CliError> {
    let base = ExperimentConfig::default();
    let mut out = Vec::new();
    for k in [1.2, 1.5, 2.0] {
        let mut c = base.clone();
        c.scenario_id = format!("outside_k{k:.1}");
        c.eve = EveScenario::OutsideRing { k, epsilon: 1.0 };
        out.push(c);
    }
    let mut c = base.clone();
    c.scenario_id = "inside".into();
    c.eve = EveScenario::InsideUniform;
    out.push(c);

    let dep = base.deployment()?;
    let radial_offset = 50.0;
    // Nearest node whose outward shift stays inside the zone.
    let aoa_target = (0..dep.m())
        .find(|&i| dep.alice[i].distance + radial_offset <= dep.d0)
        .ok_or_else(|| CliError::Validation("no node leaves room for a 50 m radial offset".into()))?;
    let mut c = base.clone();
    c.scenario_id = "worst_aoa".into();
    c.eve = EveScenario::WorstCaseAoa { target: aoa_target, radial_offset };
    c.plan.n_trials = 10_000;
    out.push(c);

    // Same range, 10 degrees of bearing away from the node in the middle.
    let target = dep.m() / 2;
    let aoa = dep.alice[target].aoa;
    let angular_offset = if aoa + 10.0 <= 180.0 { 10.0 } else { -10.0 };
    let mut c = base.clone();
    c.scenario_id = "worst_distance".into();
    c.eve = EveScenario::WorstCaseDistance { target, angular_offset };
    c.plan.n_trials = 10_000;
    out.push(c);
    for c in &out {
        c.validate()?;
    }
    Ok(out.into_iter().map(|c| c.resolved()).collect())
}

/// Writes every preset as `<scenario_id>.json`.
pub fn emit_scenarios(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    output::prepare_dir(dir)?;
    let mut files = Vec::new();
    for c in scenario_presets()? {
        let p = dir.join(format!("{}.json", c.scenario_id));
        output::write_json(&p, &c)?;
        files.push(p);
    }
    Ok(files)
}
