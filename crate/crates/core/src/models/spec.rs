use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Dqd3, Dqd6, DqdParams, ParametricHamiltonian, PauliMode, PauliModel, ScaledModel, Sw2};
use crate::error::{Error, Result};

/// Multiplier applied to every energy when a model is built: `1` reads
/// quoted GHz values as angular frequencies, `2pi` as ordinary ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngularFactor {
    #[default]
    One,
    TwoPi,
}

impl AngularFactor {
    pub fn value(self) -> f64 {
        match self {
            AngularFactor::One => 1.0,
            AngularFactor::TwoPi => 2.0 * std::f64::consts::PI,
        }
    }
}

impl fmt::Display for AngularFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AngularFactor::One => "1",
            AngularFactor::TwoPi => "2pi",
        })
    }
}

impl FromStr for AngularFactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "one" | "1.0" => Ok(AngularFactor::One),
            "2pi" | "2π" | "two_pi" => Ok(AngularFactor::TwoPi),
            other => Err(Error::Config(format!("angular_factor must be 1 or 2pi, got {other:?}"))),
        }
    }
}

impl Serialize for AngularFactor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AngularFactor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v == 1.0 => Ok(AngularFactor::One),
            Raw::Num(v) if (v - 2.0 * std::f64::consts::PI).abs() < 1e-9 => Ok(AngularFactor::TwoPi),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("angular_factor must be 1 or 2pi, got {v}"))),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Pauli,
    Dqd3,
    Dqd6,
    Sw2,
}

/// Declarative model description as it appears in a config file.
///
/// ```toml
/// [model]
/// kind = "dqd3"
/// u_tilde = 100.0
/// omega = 1.0
/// de_z = 1.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_tilde: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub de_z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub de_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

impl ModelSpec {
    pub fn dqd3(p: DqdParams) -> Self {
        Self::from_dqd(ModelKind::Dqd3, p)
    }

    pub fn dqd6(p: DqdParams) -> Self {
        Self::from_dqd(ModelKind::Dqd6, p)
    }

    pub fn sw2(omega: f64, de_z: f64) -> Self {
        Self { omega: Some(omega), de_z: Some(de_z), ..Self::empty(ModelKind::Sw2) }
    }

    pub fn pauli(mode: PauliMode) -> Self {
        let (name, phi, z) = match mode {
            PauliMode::Cylindrical => ("cylindrical", None, None),
            PauliMode::Bloch => ("bloch", None, None),
            PauliMode::RhoOnly { phi, z } => ("rho_only", Some(phi), Some(z)),
            PauliMode::RhoPhi { z } => ("rho_phi", None, Some(z)),
            PauliMode::RhoZ { phi } => ("rho_z", Some(phi), None),
            PauliMode::ThetaOnly { phi } => ("theta_only", Some(phi), None),
        };
        Self { mode: Some(name.into()), phi, z, ..Self::empty(ModelKind::Pauli) }
    }

    fn empty(kind: ModelKind) -> Self {
        Self { kind, mode: None, u_tilde: None, omega: None, e_z: None, de_z: None, de_x: None, z: None, phi: None }
    }

    fn from_dqd(kind: ModelKind, p: DqdParams) -> Self {
        Self {
            u_tilde: Some(p.u_tilde),
            omega: Some(p.omega),
            e_z: Some(p.e_z),
            de_z: Some(p.de_z),
            de_x: Some(p.de_x),
            ..Self::empty(kind)
        }
    }

    /// DQD parameters, falling back to the study defaults of the chosen
    /// model for any key left out.
    pub fn dqd_params(&self) -> DqdParams {
        let d = match self.kind {
            ModelKind::Dqd6 => DqdParams::six_level_default(),
            _ => DqdParams::three_level_default(),
        };
        DqdParams {
            u_tilde: self.u_tilde.unwrap_or(d.u_tilde),
            omega: self.omega.unwrap_or(d.omega),
            e_z: self.e_z.unwrap_or(d.e_z),
            de_z: self.de_z.unwrap_or(d.de_z),
            de_x: self.de_x.unwrap_or(d.de_x),
        }
    }

    /// Same spec with Ω and ΔE_Z replaced, as used by grid sweeps.
    pub fn with_couplings(&self, omega: Option<f64>, de_z: Option<f64>) -> Self {
        let mut s = self.clone();
        if omega.is_some() {
            s.omega = omega;
        }
        if de_z.is_some() {
            s.de_z = de_z;
        }
        s
    }

    pub fn pauli_mode(&self) -> Result<PauliMode> {
        let phi = self.phi.unwrap_or(0.0);
        let z = self.z.unwrap_or(0.0);
        Ok(match self.mode.as_deref().unwrap_or("cylindrical") {
            "cylindrical" => PauliMode::Cylindrical,
            "bloch" => PauliMode::Bloch,
            "rho_only" => PauliMode::RhoOnly { phi, z },
            "rho_phi" => PauliMode::RhoPhi { z },
            "rho_z" => PauliMode::RhoZ { phi },
            "theta_only" => PauliMode::ThetaOnly { phi },
            other => return Err(Error::Config(format!("unknown pauli mode {other:?}"))),
        })
    }

    /// Builds the model with every energy multiplied by `factor`.
    pub fn build(&self, factor: AngularFactor) -> Result<Arc<dyn ParametricHamiltonian>> {
        let base: Arc<dyn ParametricHamiltonian> = match self.kind {
            ModelKind::Pauli => Arc::new(PauliModel::new(self.pauli_mode()?)),
            ModelKind::Dqd3 => Arc::new(Dqd3::new(self.dqd_params())?),
            ModelKind::Dqd6 => Arc::new(Dqd6::new(self.dqd_params())?),
            ModelKind::Sw2 => {
                let p = self.dqd_params();
                Arc::new(Sw2::new(p.omega, p.de_z)?)
            }
        };
        Ok(match factor {
            AngularFactor::One => base,
            AngularFactor::TwoPi => Arc::new(ScaledModel::new(base, factor.value())),
        })
    }
}
