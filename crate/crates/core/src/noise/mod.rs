//! Robustness studies: quasistatic detuning offsets and miscalibrated tunnel
//! coupling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::transfer_probability;
use crate::error::{Error, Result};
use crate::models::{AngularFactor, ModelSpec, ParametricHamiltonian};
use crate::par::par_map;
use crate::pulse::{build_pulse, Protocol, DEFAULT_SAMPLES};

/// Where the offsets come from.
#[derive(Debug, Clone, PartialEq)]
pub enum OffsetSource {
    /// `count` evenly spaced offsets on `[-max, max]`.
    Grid { max: f64, count: usize },
    /// Explicit list.
    Fixed { offsets: Vec<f64> },
    /// `n_samples` draws from 𝒩(0, σ²).
    Gaussian { sigma: f64, n_samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetMode {
    #[default]
    Grid,
    Fixed,
    Gaussian,
}

/// How an offset δε enters the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationMode {
    /// The pulse is re-synthesized between the shifted boundaries
    /// `ε_{0,f} + δε` and played on the unshifted system.
    #[default]
    Boundary,
    /// The nominal pulse is offset, `ε(t) + δε`.
    Additive,
}

/// Quasistatic ensemble. In config form:
///
/// ```toml
/// mode = "gaussian"   # or "grid" (default, max = 5, count = 11) / "fixed"
/// sigma = 1.0
/// n_samples = 200
/// seed = 7
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasistaticSpec {
    #[serde(default)]
    pub mode: OffsetMode,
    #[serde(default = "default_max")]
    pub max: f64,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub perturbation: PerturbationMode,
}

fn default_max() -> f64 {
    5.0
}

fn default_count() -> usize {
    11
}

impl Default for QuasistaticSpec {
    fn default() -> Self {
        Self {
            mode: OffsetMode::Grid,
            max: default_max(),
            count: default_count(),
            offsets: None,
            sigma: None,
            n_samples: None,
            seed: 0,
            perturbation: PerturbationMode::Boundary,
        }
    }
}

impl QuasistaticSpec {
    pub fn from_source(source: OffsetSource, seed: u64, perturbation: PerturbationMode) -> Self {
        let base = Self { seed, perturbation, ..Self::default() };
        match source {
            OffsetSource::Grid { max, count } => Self { mode: OffsetMode::Grid, max, count, ..base },
            OffsetSource::Fixed { offsets } => Self { mode: OffsetMode::Fixed, offsets: Some(offsets), ..base },
            OffsetSource::Gaussian { sigma, n_samples } => {
                Self { mode: OffsetMode::Gaussian, sigma: Some(sigma), n_samples: Some(n_samples), ..base }
            }
        }
    }

    pub fn source(&self) -> Result<OffsetSource> {
        match self.mode {
            OffsetMode::Grid => Ok(OffsetSource::Grid { max: self.max, count: self.count }),
            OffsetMode::Fixed => match &self.offsets {
                Some(o) => Ok(OffsetSource::Fixed { offsets: o.clone() }),
                None => Err(Error::Config("mode \"fixed\" needs an `offsets` list".into())),
            },
            OffsetMode::Gaussian => match (self.sigma, self.n_samples) {
                (Some(sigma), Some(n_samples)) => Ok(OffsetSource::Gaussian { sigma, n_samples }),
                _ => Err(Error::Config("mode \"gaussian\" needs `sigma` and `n_samples`".into())),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.source()? {
            OffsetSource::Grid { max, count } => {
                if !(max.is_finite() && *max >= 0.0) || *count < 1 {
                    return Err(Error::Config(format!("offset grid needs max ≥ 0 and count ≥ 1, got {max}, {count}")));
                }
            }
            OffsetSource::Fixed { offsets } => {
                if offsets.is_empty() || offsets.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config("fixed offsets must be a non-empty list of numbers".into()));
                }
            }
            OffsetSource::Gaussian { sigma, n_samples } => {
                if !(sigma.is_finite() && *sigma >= 0.0) || *n_samples < 1 {
                    return Err(Error::Config(format!(
                        "gaussian needs sigma ≥ 0 and n_samples ≥ 1, got {sigma}, {n_samples}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The δε values, in sample order.
    pub fn offsets(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match self.source()? {
            OffsetSource::Grid { max, count } => {
                if count == 1 {
                    vec![0.0]
                } else {
                    (0..count).map(|k| -max + 2.0 * max * k as f64 / (count - 1) as f64).collect()
                }
            }
            OffsetSource::Fixed { offsets } => offsets,
            OffsetSource::Gaussian { sigma, n_samples } => {
                (0..n_samples).map(|k| sigma * standard_normal(self.seed, k as u64)).collect()
            }
        })
    }
}

/// Standard normal deviate for sample `index` of stream `seed`: ChaCha8
/// seeded with `seed`, stream `index`, two uniforms through Box–Muller
/// (`√(-2 ln(1-u₁)) cos(2π u₂)`).
pub fn standard_normal(seed: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Pulse and propagation settings shared by the robustness studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub eps0: f64,
    pub eps_f: f64,
    pub t_f: f64,
    pub protocol: Protocol,
    pub samples: usize,
    pub steps: usize,
    pub level: usize,
}

impl RunSettings {
    pub fn new(eps0: f64, eps_f: f64, t_f: f64, protocol: Protocol) -> Self {
        Self { eps0, eps_f, t_f, protocol, samples: DEFAULT_SAMPLES, steps: crate::dynamics::DEFAULT_STEPS, level: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasistaticReport {
    pub offsets: Vec<f64>,
    pub fidelities: Vec<f64>,
    /// `F(δε) - F(0)`.
    pub delta_f: Vec<f64>,
    pub f0: f64,
    pub mean_delta_f: f64,
    pub std_delta_f: f64,
    pub max_abs_delta_f: f64,
}

fn fidelity_with_offset(
    model: &dyn ParametricHamiltonian,
    s: &RunSettings,
    mode: PerturbationMode,
    d: f64,
) -> Result<f64> {
    let pulse = match mode {
        PerturbationMode::Boundary => {
            build_pulse(model, s.protocol, s.eps0 + d, s.eps_f + d, s.t_f, s.samples, s.level)?
        }
        PerturbationMode::Additive => {
            build_pulse(model, s.protocol, s.eps0, s.eps_f, s.t_f, s.samples, s.level)?.shifted(d)?
        }
    };
    transfer_probability(model, &pulse, s.level, s.steps)
}

/// Transfer fidelity for each quasistatic offset, relative to the noiseless
/// run.
pub fn quasistatic_run(
    model: &dyn ParametricHamiltonian,
    settings: &RunSettings,
    spec: &QuasistaticSpec,
) -> Result<QuasistaticReport> {
    let offsets = spec.offsets()?;
    let f0 = fidelity_with_offset(model, settings, spec.perturbation, 0.0)?;
    let fidelities: Vec<f64> =
        par_map(
            &offsets,
            |&d| {
                if d == 0.0 {
                    Ok(f0)
                } else {
                    fidelity_with_offset(model, settings, spec.perturbation, d)
                }
            },
        )
        .into_iter()
        .collect::<Result<_>>()?;
    let delta_f: Vec<f64> = fidelities.iter().map(|f| f - f0).collect();
    let n = delta_f.len() as f64;
    let mean = delta_f.iter().sum::<f64>() / n;
    let var = delta_f.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    let max_abs = delta_f.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    Ok(QuasistaticReport {
        offsets,
        fidelities,
        delta_f,
        f0,
        mean_delta_f: mean,
        std_delta_f: var.sqrt(),
        max_abs_delta_f: max_abs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiscalibrationSpec {
    /// Tunnel coupling of the actual system, Ω₀.
    pub omega_system: f64,
    /// Offsets δΩ assumed when synthesizing the pulse.
    pub delta_omega: Vec<f64>,
}

impl MiscalibrationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_system > 0.0) {
            return Err(Error::Config(format!("omega_system must be positive, got {}", self.omega_system)));
        }
        if let Some(d) = self.delta_omega.iter().find(|d| !(self.omega_system + **d > 0.0)) {
            return Err(Error::Config(format!("pulse coupling Ω₀ + δΩ must stay positive (δΩ = {d})")));
        }
        Ok(())
    }
}

/// Fidelity deviations `F(δΩ) - F(0)`, indexed `[t_f][δΩ]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiscalibrationReport {
    pub t_f: Vec<f64>,
    pub delta_omega: Vec<f64>,
    pub fidelity: Vec<Vec<f64>>,
    pub deviation: Vec<Vec<f64>>,
}

/// Pulses synthesized for coupling `Ω₀ + δΩ`, played on the system with `Ω₀`.
pub fn miscalibration_run(
    model: &ModelSpec,
    factor: AngularFactor,
    settings: &RunSettings,
    spec: &MiscalibrationSpec,
    t_f: &[f64],
) -> Result<MiscalibrationReport> {
    spec.validate()?;
    let system = model.with_couplings(Some(spec.omega_system), None).build(factor)?;
    let mut assumed = vec![0.0];
    assumed.extend(spec.delta_omega.iter().copied().filter(|d| *d != 0.0));
    let cells: Vec<(usize, f64)> = (0..t_f.len()).flat_map(|i| assumed.iter().map(move |&d| (i, d))).collect();
    let values: Vec<f64> = par_map(&cells, |&(i, d)| {
        let pulse_model = model.with_couplings(Some(spec.omega_system + d), None).build(factor)?;
        let s = RunSettings { t_f: t_f[i], ..*settings };
        let pulse = build_pulse(pulse_model.as_ref(), s.protocol, s.eps0, s.eps_f, s.t_f, s.samples, s.level)?;
        transfer_probability(system.as_ref(), &pulse, s.level, s.steps)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let per_tf = assumed.len();
    let mut fidelity = Vec::with_capacity(t_f.len());
    let mut deviation = Vec::with_capacity(t_f.len());
    for i in 0..t_f.len() {
        let row = &values[i * per_tf..(i + 1) * per_tf];
        let f0 = row[0];
        let lookup = |d: f64| {
            if d == 0.0 {
                f0
            } else {
                row[1 + spec.delta_omega.iter().filter(|x| **x != 0.0).position(|x| *x == d).unwrap()]
            }
        };
        let f: Vec<f64> = spec.delta_omega.iter().map(|&d| lookup(d)).collect();
        deviation.push(f.iter().map(|v| v - f0).collect());
        fidelity.push(f);
    }
    Ok(MiscalibrationReport { t_f: t_f.to_vec(), delta_omega: spec.delta_omega.clone(), fidelity, deviation })
}
