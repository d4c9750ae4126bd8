//! Experiment configuration: JSON in, fully resolved core objects out.

use serde::{Deserialize, Serialize};
use uwauth_core::analytic::{AnalyticForm, Normalization};
use uwauth_core::detect::{DetectionMode, FusionRule, Thresholds};
use uwauth_core::geometry::{Deployment, EveScenario, PolarPosition};
use uwauth_core::ranging::{LinkConfig, RangingLink};
use uwauth_core::sim::{ChannelMode, OccupantLaw, TrialPlan};
use uwauth_core::SnrPoint;

use crate::CliError;

/// Seed of the default deployment. Its ten nodes are at least 20 m apart in
/// range and 40 m clear of both zone edges.
pub const DEFAULT_GEOMETRY_SEED: u64 = 291;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryConfig {
    pub d0: f64,
    #[serde(alias = "M")]
    pub m: usize,
    pub d_min: f64,
    pub seed: u64,
    /// Explicit nodes; overrides `m` and `seed` when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alice: Option<Vec<PolarPosition>>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { d0: 500.0, m: 10, d_min: 10.0, seed: DEFAULT_GEOMETRY_SEED, alice: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelConfig {
    pub mode: ChannelMode,
    /// Waveform chain settings, used by `colored_waveform`.
    pub colored: LinkConfig,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { mode: ChannelMode::AwgnFeatures, colored: LinkConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdConfig {
    pub eps_p: f64,
    pub eps_d: f64,
    pub eps_theta: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self { eps_p: 1.0, eps_d: 1.0, eps_theta: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanConfig {
    pub snr_grid_db: Vec<f64>,
    pub n_trials: u64,
    pub seed: u64,
    pub occupant_law: OccupantLaw,
    /// Defaults to the mode paired with the channel.
    pub detection_mode: Option<DetectionMode>,
    pub step2_rule: FusionRule,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            snr_grid_db: (-10..=30).step_by(5).map(f64::from).collect(),
            n_trials: 100_000,
            seed: 1,
            occupant_law: OccupantLaw::EqualPriors,
            detection_mode: None,
            step2_rule: FusionRule::And,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalyticConfig {
    pub form: AnalyticForm,
    pub normalization: Normalization,
    /// Lowest SNR (dB) at which a comparison row decides the validation
    /// result. `None` gates every point of the AWGN channel and none of
    /// the colored channel.
    pub gate_min_snr_db: Option<f64>,
}

impl Default for AnalyticConfig {
    fn default() -> Self {
        Self { form: AnalyticForm::PerNode, normalization: Normalization::Conditional, gate_min_snr_db: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: String,
    pub format: OutputFormat,
    /// Also write every decision record (large).
    pub records: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into(), format: OutputFormat::Csv, records: false }
    }
}

fn default_scenario_id() -> String {
    "default".into()
}

fn default_eve() -> EveScenario {
    EveScenario::OutsideRing { k: 2.0, epsilon: 1.0 }
}

/// The whole configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_scenario_id")]
    pub scenario_id: String,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default = "default_eve")]
    pub eve: EveScenario,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
    #[serde(default)]
    pub plan: PlanConfig,
    #[serde(default)]
    pub analytic: AnalyticConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config uses defaults")
    }
}

/// Parses a JSON document, rejecting unknown keys by full path.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let mut unknown = Vec::new();
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()))
        .map_err(|e| CliError::Validation(format!("config: {e}")))?;
    if !unknown.is_empty() {
        return Err(CliError::Validation(format!("unknown config keys: {}", unknown.join(", "))));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{name} must be positive and finite, got {v}")))
    }
}

fn core(prefix: &str) -> impl Fn(uwauth_core::Error) -> CliError + '_ {
    move |e| CliError::Validation(format!("{prefix}: {e}"))
}

impl ExperimentConfig {
    pub fn detection_mode(&self) -> DetectionMode {
        self.plan.detection_mode.unwrap_or(match self.channel.mode {
            ChannelMode::AwgnFeatures => DetectionMode::Full,
            ChannelMode::ColoredWaveform => DetectionMode::DistanceOnly,
        })
    }

    /// Checks every field and cross-field pairing.
    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.geometry;
        positive("geometry.d0", g.d0)?;
        if !(g.d_min >= 0.0 && g.d_min < g.d0) {
            return Err(CliError::Validation(format!(
                "geometry.d_min must satisfy 0 <= d_min < d0, got {}",
                g.d_min
            )));
        }
        match &g.alice {
            Some(a) if a.is_empty() => return Err(CliError::Validation("geometry.alice must not be empty".into())),
            None if g.m == 0 => return Err(CliError::Validation("geometry.M must be at least 1".into())),
            _ => {}
        }
        positive("thresholds.eps_p", self.thresholds.eps_p)?;
        positive("thresholds.eps_d", self.thresholds.eps_d)?;
        positive("thresholds.eps_theta", self.thresholds.eps_theta)?;
        if self.plan.snr_grid_db.is_empty() {
            return Err(CliError::Validation("plan.snr_grid_db must not be empty".into()));
        }
        if let Some(x) = self.plan.snr_grid_db.iter().find(|x| !x.is_finite()) {
            return Err(CliError::Validation(format!("plan.snr_grid_db contains {x}")));
        }
        if self.plan.n_trials == 0 {
            return Err(CliError::Validation("plan.n_trials must be at least 1".into()));
        }
        if let Some(s) = self.analytic.gate_min_snr_db {
            if !s.is_finite() {
                return Err(CliError::Validation(format!("analytic.gate_min_snr_db must be finite, got {s}")));
            }
        }
        self.plan_spec().validate().map_err(core("plan"))?;
        self.channel.colored.acoustic.validate().map_err(core("channel.colored.acoustic"))?;
        if self.channel.mode == ChannelMode::ColoredWaveform && g.d_min <= 0.0 {
            return Err(CliError::Validation(
                "geometry.d_min must be positive with channel.mode = colored_waveform (pathloss at 0 m)".into(),
            ));
        }
        let dep = self.deployment()?;
        self.eve.validate(&dep).map_err(core("eve"))?;
        Ok(())
    }

    pub fn deployment(&self) -> Result<Deployment, CliError> {
        let g = &self.geometry;
        match &g.alice {
            Some(a) => Deployment::new(g.d0, g.d_min, a.clone()).map_err(core("geometry.alice")),
            None => Deployment::seeded(g.m, g.d0, g.d_min, g.seed).map_err(core("geometry")),
        }
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            d0: self.geometry.d0,
            eps_p: self.thresholds.eps_p,
            eps_d: self.thresholds.eps_d,
            eps_theta: self.thresholds.eps_theta,
        }
    }

    pub fn snr_points(&self) -> Vec<SnrPoint> {
        self.plan.snr_grid_db.iter().copied().map(SnrPoint::from_db).collect()
    }

    pub fn plan_spec(&self) -> TrialPlan {
        TrialPlan {
            snr: self.snr_points(),
            n_trials: self.plan.n_trials,
            seed: self.plan.seed,
            occupant_law: self.plan.occupant_law,
            channel_mode: self.channel.mode,
            detection_mode: self.detection_mode(),
            step2_rule: self.plan.step2_rule,
        }
    }

    /// Builds the ranging link when the channel needs one.
    pub fn link(&self) -> Result<Option<RangingLink>, CliError> {
        match self.channel.mode {
            ChannelMode::AwgnFeatures => Ok(None),
            ChannelMode::ColoredWaveform => {
                RangingLink::new(self.channel.colored.clone()).map(Some).map_err(core("channel.colored"))
            }
        }
    }

    /// The document with every default filled in and the mode made explicit.
    pub fn resolved(&self) -> ExperimentConfig {
        let mut c = self.clone();
        c.plan.detection_mode = Some(self.detection_mode());
        c
    }
}
