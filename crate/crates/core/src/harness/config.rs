use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{DephasingVariant, LindbladMethod, DEFAULT_STEPS};
use crate::error::{Error, Result};
use crate::models::{AngularFactor, DqdParams, ModelKind, ModelSpec, PauliMode};
use crate::noise::{MiscalibrationSpec, QuasistaticSpec};
use crate::pulse::{Protocol, DEFAULT_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig2TwoLevel,
    Fig3_6x6,
    Fig5Grids,
    Fig6Quasistatic,
    Fig7OptimalTime,
    Fig8Miscal,
    PopTrace,
    Custom,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fig2TwoLevel => "fig2_two_level",
            ExperimentKind::Fig3_6x6 => "fig3_6x6",
            ExperimentKind::Fig5Grids => "fig5_grids",
            ExperimentKind::Fig6Quasistatic => "fig6_quasistatic",
            ExperimentKind::Fig7OptimalTime => "fig7_optimal_time",
            ExperimentKind::Fig8Miscal => "fig8_miscal",
            ExperimentKind::PopTrace => "pop_trace",
            ExperimentKind::Custom => "custom",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// A swept quantity. Either `values` or `min`/`max`/`count` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl AxisSpec {
    pub fn range(name: &str, min: f64, max: f64, count: usize, spacing: Spacing) -> Self {
        Self { name: name.into(), min: Some(min), max: Some(max), count: Some(count), spacing, values: None }
    }

    pub fn list(name: &str, values: Vec<f64>) -> Self {
        Self { name: name.into(), min: None, max: None, count: None, spacing: Spacing::Linear, values: Some(values) }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.values {
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!("axis {}: values must be non-empty and finite", self.name)));
            }
            return Ok(v.clone());
        }
        let (Some(lo), Some(hi), Some(n)) = (self.min, self.max, self.count) else {
            return Err(Error::Config(format!("axis {}: give values or min, max and count", self.name)));
        };
        if n == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("axis {}: bad range [{lo}, {hi}] x {n}", self.name)));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        let f = |k: usize| k as f64 / (n - 1) as f64;
        Ok(match self.spacing {
            Spacing::Linear => (0..n).map(|k| lo + (hi - lo) * f(k)).collect(),
            Spacing::Log => {
                if !(lo > 0.0 && hi > 0.0) {
                    return Err(Error::Config(format!("axis {}: log spacing needs positive bounds", self.name)));
                }
                let (a, b) = (lo.ln(), hi.ln());
                // rounded to 12 significant digits so decades come out exact
                let mut v: Vec<f64> =
                    (0..n).map(|k| format!("{:.11e}", (a + (b - a) * f(k)).exp()).parse().unwrap()).collect();
                v[0] = lo;
                v[n - 1] = hi;
                v
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub angular_factor: AngularFactor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricModel {
    /// Pulses are built from the metric of the propagated model.
    #[default]
    Full,
    /// Pulses are built from the two lowest levels only.
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[derive(Default)]
pub struct PulseSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_f: Option<f64>,
    #[serde(default)]
    pub protocols: Vec<Protocol>,
    #[serde(default)]
    pub level: usize,
    /// Defaults to `truncated` for the 6×6 study and `full` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_model: Option<MetricModel>,
    /// CSV schedule (`t,eps`) played instead of a synthesized pulse.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub lindblad_method: LindbladMethod,
    /// Points kept along time traces.
    #[serde(default = "default_record_points")]
    pub record_points: usize,
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_record_points() -> usize {
    201
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            steps: default_steps(),
            samples: default_samples(),
            lindblad_method: LindbladMethod::Action,
            record_points: default_record_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladSection {
    /// Dephasing times; `inf` gives the noiseless limit.
    #[serde(default)]
    pub t2: Vec<f64>,
    #[serde(default)]
    pub variant: DephasingVariant,
}

impl Default for LindbladSection {
    fn default() -> Self {
        Self { t2: Vec::new(), variant: DephasingVariant::A }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    /// Values of the model parameters that are not swept, in model order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default)]
    pub level: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Svg]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir(), formats: default_formats() }
    }
}

/// A complete experiment description, read from TOML.
///
/// ```toml
/// [experiment]
/// kind = "fig5_grids"
/// seed = 1
///
/// [model]
/// kind = "dqd3"
///
/// [pulse]
/// eps0 = 200.0
/// eps_f = 0.0
/// t_f = 20.0
/// protocols = ["linear", "geometric"]
///
/// [[axes]]
/// name = "de_z"
/// min = 0.5
/// max = 5.0
/// count = 8
/// spacing = "log"
/// ```
///
/// Sections left out are filled with the defaults of the experiment kind by
/// [`ExperimentConfig::effective`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub pulse: PulseSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub axes: Vec<AxisSpec>,
    #[serde(default)]
    pub lindblad: LindbladSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<QuasistaticSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub miscal: Option<MiscalibrationSpec>,
    #[serde(default)]
    pub metric: MetricSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Axis names a transfer grid understands.
pub const GRID_AXES: &[&str] = &["omega", "de_z", "de_x", "u_tilde", "e_z", "z", "eps0", "eps_f", "t_f", "t2"];

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        // relative pulse files are resolved against the config location
        if let (Some(file), Some(dir)) = (&cfg.pulse.file, path.parent()) {
            if file.is_relative() {
                cfg.pulse.file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    /// A config of the given kind with every section at its default.
    pub fn preset(kind: ExperimentKind) -> Self {
        Self {
            experiment: ExperimentSection { kind, name: None, seed: 0, threads: 0, angular_factor: AngularFactor::One },
            model: None,
            pulse: PulseSection::default(),
            solver: SolverSection::default(),
            axes: Vec::new(),
            lindblad: LindbladSection::default(),
            noise: None,
            miscal: None,
            metric: MetricSection::default(),
            output: OutputSection::default(),
        }
        .effective()
    }

    pub fn name(&self) -> String {
        self.experiment.name.clone().unwrap_or_else(|| self.experiment.kind.name().to_string())
    }

    /// Fills whatever the file leaves out with the defaults of its kind.
    pub fn effective(mut self) -> Self {
        use ExperimentKind::*;
        let kind = self.experiment.kind;
        if self.model.is_none() {
            self.model = Some(match kind {
                Fig2TwoLevel => ModelSpec::pauli(PauliMode::RhoOnly { phi: 0.0, z: 0.1 }),
                Fig3_6x6 => ModelSpec::dqd6(DqdParams::six_level_default()),
                Fig6Quasistatic | Fig8Miscal => {
                    ModelSpec::dqd3(DqdParams { omega: 3.0, de_z: 0.5, ..DqdParams::three_level_default() })
                }
                _ => ModelSpec::dqd3(DqdParams::three_level_default()),
            });
        }
        let model = self.model.as_ref().unwrap();
        let (e0, ef) = match model.kind {
            ModelKind::Pauli => (-10.0, 10.0),
            ModelKind::Sw2 => (20.0, -20.0),
            ModelKind::Dqd6 => {
                let u = model.dqd_params().u_tilde;
                (1.5 * u, 10.0)
            }
            ModelKind::Dqd3 => {
                let u = model.dqd_params().u_tilde;
                (2.0 * u, 0.0)
            }
        };
        self.pulse.eps0.get_or_insert(e0);
        self.pulse.eps_f.get_or_insert(ef);
        self.pulse.t_f.get_or_insert(match kind {
            PopTrace => 10.0,
            Fig3_6x6 => 150.0,
            _ => 20.0,
        });
        if self.pulse.protocols.is_empty() {
            self.pulse.protocols = match kind {
                Fig2TwoLevel => vec![Protocol::Linear, Protocol::Geometric, Protocol::AnalyticTwoLevel],
                Fig6Quasistatic | Fig8Miscal => vec![Protocol::Geometric],
                _ => vec![Protocol::Linear, Protocol::Geometric],
            };
        }
        self.pulse.metric_model.get_or_insert(if kind == Fig3_6x6 {
            MetricModel::Truncated
        } else {
            MetricModel::Full
        });
        if self.axes.is_empty() {
            self.axes = match kind {
                Fig2TwoLevel => vec![AxisSpec::range("t_f", 1.0, 50.0, 50, Spacing::Linear)],
                Fig3_6x6 => vec![AxisSpec::range("t_f", 1.0, 150.0, 25, Spacing::Log)],
                Fig5Grids => vec![
                    AxisSpec::range("de_z", 0.5, 5.0, 8, Spacing::Log),
                    AxisSpec::range("omega", 0.5, 5.0, 8, Spacing::Log),
                ],
                Fig7OptimalTime => vec![
                    AxisSpec::range("t2", 1.0, 1000.0, 4, Spacing::Log),
                    AxisSpec::range("t_f", 1.0, 50.0, 50, Spacing::Linear),
                ],
                Fig8Miscal => vec![AxisSpec::list("t_f", vec![20.0, 30.0, 40.0])],
                Fig6Quasistatic | PopTrace | Custom => Vec::new(),
            };
        }
        if kind == PopTrace && self.lindblad.t2.is_empty() {
            self.lindblad.t2 = vec![1.0, 10.0, 100.0];
        }
        if kind == Fig6Quasistatic && self.noise.is_none() {
            self.noise = Some(QuasistaticSpec { seed: self.experiment.seed, ..QuasistaticSpec::default() });
        }
        if kind == Fig8Miscal && self.miscal.is_none() {
            let omega = model.dqd_params().omega;
            self.miscal =
                Some(MiscalibrationSpec { omega_system: omega, delta_omega: vec![-1.0, -0.5, -0.25, 0.25, 0.5, 1.0] });
        }
        self
    }

    /// Checks cross-section consistency. Call on the effective config.
    pub fn validate(&self) -> Result<()> {
        let model = self.model.as_ref().ok_or_else(|| Error::Config("missing [model]".into()))?;
        model.build(AngularFactor::One).map_err(config_error)?;
        for (name, v) in [("eps0", self.pulse.eps0), ("eps_f", self.pulse.eps_f)] {
            if !v.is_some_and(f64::is_finite) {
                return Err(Error::Config(format!("pulse.{name} must be a finite number")));
            }
        }
        if !self.pulse.t_f.is_some_and(|t| t > 0.0 && t.is_finite()) {
            return Err(Error::Config("pulse.t_f must be positive".into()));
        }
        if self.solver.steps == 0 || self.solver.samples < 3 || self.solver.record_points < 2 {
            return Err(Error::Config("solver needs steps ≥ 1, samples ≥ 3, record_points ≥ 2".into()));
        }
        let mut seen = Vec::new();
        for a in &self.axes {
            if seen.contains(&a.name) {
                return Err(Error::Config(format!("axis {} given twice", a.name)));
            }
            seen.push(a.name.clone());
            let v = a.values()?;
            if matches!(a.name.as_str(), "t_f" | "t2") && v.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::Config(format!("axis {} must be positive", a.name)));
            }
        }
        for &t2 in &self.lindblad.t2 {
            if !(t2 > 0.0) {
                return Err(Error::Config(format!("lindblad.t2 must be positive, got {t2}")));
            }
        }
        if let Some(n) = &self.noise {
            n.validate().map_err(config_error)?;
        }
        if let Some(m) = &self.miscal {
            m.validate()?;
        }
        if self.pulse.protocols.contains(&Protocol::AnalyticTwoLevel) {
            let ok = model.kind == ModelKind::Pauli
                && matches!(model.pauli_mode()?, PauliMode::RhoOnly { .. } | PauliMode::ThetaOnly { .. });
            if !ok {
                return Err(Error::Config("analytic_two_level needs a pauli rho_only or theta_only model".into()));
            }
        }
        if self.pulse.protocols.contains(&Protocol::SwClosedForm)
            && !matches!(model.kind, ModelKind::Dqd3 | ModelKind::Sw2)
        {
            return Err(Error::Config("sw_closed_form needs a dqd3 or sw2 model".into()));
        }
        if self.output.formats.is_empty() {
            return Err(Error::Config("output.formats is empty".into()));
        }
        Ok(())
    }

    /// Canonical JSON form, echoed into every report.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config is serializable")
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.to_json()).expect("config is serializable");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn model(&self) -> &ModelSpec {
        self.model.as_ref().expect("effective config has a model")
    }
}

fn config_error(e: Error) -> Error {
    if e.is_config() {
        Error::Config(e.to_string())
    } else {
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_kind_defaults() {
        let cfg = ExperimentConfig::from_toml("[experiment]\nkind = \"fig5_grids\"\n").unwrap().effective();
        cfg.validate().unwrap();
        assert_eq!(cfg.axes.len(), 2);
        assert_eq!(cfg.axes[0].values().unwrap().len(), 8);
        assert_eq!(cfg.pulse.t_f, Some(20.0));
        assert_eq!(cfg.pulse.eps0, Some(200.0));
    }

    #[test]
    fn log_axis_hits_endpoints() {
        let v = AxisSpec::range("t2", 1.0, 1000.0, 4, Spacing::Log).values().unwrap();
        assert_eq!(v[0], 1.0);
        assert_eq!(v[3], 1000.0);
        assert_eq!(v[1], 10.0);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_toml("[experiment]\nkind = \"fig5_grids\"\ncolour = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("[experiment]\nkind = \"fig9\"\n").is_err());
        let mut cfg = ExperimentConfig::preset(ExperimentKind::Custom);
        cfg.pulse.t_f = Some(-1.0);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = ExperimentConfig::preset(ExperimentKind::Custom);
        cfg.pulse.protocols = vec![Protocol::AnalyticTwoLevel];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::preset(ExperimentKind::Fig5Grids);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.experiment.seed = 9;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn effective_config_round_trips_through_toml() {
        let a = ExperimentConfig::preset(ExperimentKind::Fig7OptimalTime);
        let text = toml::to_string(&a).unwrap();
        let b = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(a, b);
    }
}
