use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_mu, check_point, ParametricHamiltonian};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Fixed energies of the double quantum dot. The detuning ε is the swept
/// parameter and is passed to `h_at`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqdParams {
    /// Intra-dot Coulomb energy Ũ.
    pub u_tilde: f64,
    /// Tunnel coupling Ω.
    pub omega: f64,
    /// Total Zeeman energy E_Z.
    #[serde(default)]
    pub e_z: f64,
    /// Zeeman splitting difference ΔE_Z.
    pub de_z: f64,
    /// Transverse Zeeman difference ΔE_X.
    #[serde(default)]
    pub de_x: f64,
}

impl DqdParams {
    /// Ũ = 100, Ω = ΔE_Z = 1: the three-level study point.
    pub fn three_level_default() -> Self {
        Self { u_tilde: 100.0, omega: 1.0, e_z: 0.0, de_z: 1.0, de_x: 0.0 }
    }

    /// Ũ = 100, E_Z = 10, Ω = 10, ΔE_Z = 1, ΔE_X = 0.1: the 6×6 study point.
    pub fn six_level_default() -> Self {
        Self { u_tilde: 100.0, omega: 10.0, e_z: 10.0, de_z: 1.0, de_x: 0.1 }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.u_tilde, self.omega, self.e_z, self.de_z, self.de_x];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite DQD parameter in {self:?}")));
        }
        if self.u_tilde <= 0.0 {
            return Err(Error::InvalidParameter(format!("u_tilde must be positive, got {}", self.u_tilde)));
        }
        Ok(())
    }

    /// All energies multiplied by `f`.
    pub fn scaled(&self, f: f64) -> Self {
        Self {
            u_tilde: self.u_tilde * f,
            omega: self.omega * f,
            e_z: self.e_z * f,
            de_z: self.de_z * f,
            de_x: self.de_x * f,
        }
    }

    fn as_map(&self) -> BTreeMap<String, f64> {
        [("u_tilde", self.u_tilde), ("omega", self.omega), ("e_z", self.e_z), ("de_z", self.de_z), ("de_x", self.de_x)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }
}

/// Three-level model in the basis (S(2,0), S(1,1), T₀(1,1)):
///
/// ```text
/// [[Ũ-ε, Ω,    0   ],
///  [Ω,   0,    ΔE_Z],
///  [0,   ΔE_Z, 0   ]]
/// ```
#[derive(Debug, Clone)]
pub struct Dqd3 {
    params: DqdParams,
}

impl Dqd3 {
    pub fn new(params: DqdParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &DqdParams {
        &self.params
    }
}

impl ParametricHamiltonian for Dqd3 {
    fn dim(&self) -> usize {
        3
    }

    fn param_names(&self) -> Vec<String> {
        vec!["epsilon".into()]
    }

    fn fixed_params(&self) -> BTreeMap<String, f64> {
        let mut m = self.params.as_map();
        m.remove("e_z");
        m.remove("de_x");
        m
    }

    fn h_at(&self, x: &[f64]) -> Result<ComplexMatrix> {
        check_point(self, x)?;
        let p = &self.params;
        let eps = x[0];
        ComplexMatrix::from_real(3, 3, &[p.u_tilde - eps, p.omega, 0.0, p.omega, 0.0, p.de_z, 0.0, p.de_z, 0.0])
    }

    fn dh_at(&self, x: &[f64], mu: usize) -> Result<ComplexMatrix> {
        check_point(self, x)?;
        check_mu(self, mu)?;
        Ok(ComplexMatrix::from_diag(&[-1.0, 0.0, 0.0]))
    }

    fn basis_labels(&self) -> Vec<String> {
        vec!["S(2,0)".into(), "S(1,1)".into(), "T0(1,1)".into()]
    }
}

/// Six-level model over the singlets S(0,2), S(2,0) and the four (1,1) spin
/// states ↑↑, ↑↓, ↓↑, ↓↓; the detuning enters as Ũ ± ε on the doubly
/// occupied singlets.
#[derive(Debug, Clone)]
pub struct Dqd6 {
    params: DqdParams,
}

impl Dqd6 {
    pub fn new(params: DqdParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &DqdParams {
        &self.params
    }
}

impl ParametricHamiltonian for Dqd6 {
    fn dim(&self) -> usize {
        6
    }

    fn param_names(&self) -> Vec<String> {
        vec!["epsilon".into()]
    }

    fn fixed_params(&self) -> BTreeMap<String, f64> {
        self.params.as_map()
    }

    fn h_at(&self, x: &[f64]) -> Result<ComplexMatrix> {
        check_point(self, x)?;
        let DqdParams { u_tilde: u, omega: o, e_z: ez, de_z: dz, de_x: dx } = self.params;
        let e = x[0];
        #[rustfmt::skip]
        let m = [
            u + e, 0.0,   0.0, -o,  o,   0.0,
            0.0,   u - e, 0.0, -o,  o,   0.0,
            0.0,   0.0,   ez,  dx,  -dx, 0.0,
            -o,    -o,    dx,  dz,  0.0, dx,
            o,     o,     -dx, 0.0, -dz, -dx,
            0.0,   0.0,   0.0, dx,  -dx, -ez,
        ];
        ComplexMatrix::from_real(6, 6, &m)
    }

    fn dh_at(&self, x: &[f64], mu: usize) -> Result<ComplexMatrix> {
        check_point(self, x)?;
        check_mu(self, mu)?;
        Ok(ComplexMatrix::from_diag(&[1.0, -1.0, 0.0, 0.0, 0.0, 0.0]))
    }

    fn basis_labels(&self) -> Vec<String> {
        ["S(0,2)", "S(2,0)", "up_up", "up_down", "down_up", "down_down"].iter().map(|s| s.to_string()).collect()
    }
}
