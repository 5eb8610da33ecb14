use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use super::{check_mu, check_point, ParametricHamiltonian};
use crate::error::Result;
use crate::linalg::ComplexMatrix;

/// Which coordinates of `[[z, ρe^{-iφ}], [ρe^{iφ}, -z]]` are active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PauliMode {
    /// (ρ, φ, z)
    Cylindrical,
    /// (θ, φ) on the unit sphere: z = cos θ, ρ = sin θ.
    Bloch,
    /// (ρ) with φ and z held fixed.
    RhoOnly { phi: f64, z: f64 },
    /// (ρ, φ) with z held fixed.
    RhoPhi { z: f64 },
    /// (ρ, z) with φ held fixed.
    RhoZ { phi: f64 },
    /// (θ) on the unit sphere with φ held fixed.
    ThetaOnly { phi: f64 },
}

#[derive(Debug, Clone)]
pub struct PauliModel {
    mode: PauliMode,
}

impl PauliModel {
    pub fn new(mode: PauliMode) -> Self {
        Self { mode }
    }

    pub fn mode(&self) -> PauliMode {
        self.mode
    }

    /// Cylindrical coordinates (ρ, φ, z) for an active-parameter vector.
    fn cylindrical(&self, x: &[f64]) -> (f64, f64, f64) {
        match self.mode {
            PauliMode::Cylindrical => (x[0], x[1], x[2]),
            PauliMode::Bloch => (x[0].sin(), x[1], x[0].cos()),
            PauliMode::RhoOnly { phi, z } => (x[0], phi, z),
            PauliMode::RhoPhi { z } => (x[0], x[1], z),
            PauliMode::RhoZ { phi } => (x[0], phi, x[1]),
            PauliMode::ThetaOnly { phi } => (x[0].sin(), phi, x[0].cos()),
        }
    }
}

fn pauli_matrix(rho: c64, z: f64) -> ComplexMatrix {
    // [[z, ρ*], [ρ, -z]] with ρ = |ρ| e^{iφ}
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = c64::new(z, 0.0);
    m[(1, 1)] = c64::new(-z, 0.0);
    m[(0, 1)] = rho.conj();
    m[(1, 0)] = rho;
    m
}

impl ParametricHamiltonian for PauliModel {
    fn dim(&self) -> usize {
        2
    }

    fn param_names(&self) -> Vec<String> {
        let names: &[&str] = match self.mode {
            PauliMode::Cylindrical => &["rho", "phi", "z"],
            PauliMode::Bloch => &["theta", "phi"],
            PauliMode::RhoOnly { .. } => &["rho"],
            PauliMode::RhoPhi { .. } => &["rho", "phi"],
            PauliMode::RhoZ { .. } => &["rho", "z"],
            PauliMode::ThetaOnly { .. } => &["theta"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    fn fixed_params(&self) -> std::collections::BTreeMap<String, f64> {
        let mut m = std::collections::BTreeMap::new();
        match self.mode {
            PauliMode::RhoOnly { phi, z } => {
                m.insert("phi".into(), phi);
                m.insert("z".into(), z);
            }
            PauliMode::RhoPhi { z } => {
                m.insert("z".into(), z);
            }
            PauliMode::RhoZ { phi } | PauliMode::ThetaOnly { phi } => {
                m.insert("phi".into(), phi);
            }
            PauliMode::Cylindrical | PauliMode::Bloch => {}
        }
        m
    }

    fn h_at(&self, x: &[f64]) -> Result<ComplexMatrix> {
        check_point(self, x)?;
        let (rho, phi, z) = self.cylindrical(x);
        Ok(pauli_matrix(c64::from_polar(rho, phi), z))
    }

    fn dh_at(&self, x: &[f64], mu: usize) -> Result<ComplexMatrix> {
        check_point(self, x)?;
        check_mu(self, mu)?;
        let (rho, phi, _) = self.cylindrical(x);
        let e = c64::from_polar(1.0, phi);
        let d_rho = || pauli_matrix(e, 0.0);
        let d_phi = || pauli_matrix(e * c64::new(0.0, rho), 0.0);
        let d_z = || pauli_matrix(c64::new(0.0, 0.0), 1.0);
        let d_theta = |theta: f64| pauli_matrix(e * theta.cos(), -theta.sin());
        Ok(match (self.mode, mu) {
            (PauliMode::Cylindrical, 0)
            | (PauliMode::RhoOnly { .. }, 0)
            | (PauliMode::RhoPhi { .. }, 0)
            | (PauliMode::RhoZ { .. }, 0) => d_rho(),
            (PauliMode::Cylindrical, 1) | (PauliMode::Bloch, 1) | (PauliMode::RhoPhi { .. }, 1) => d_phi(),
            (PauliMode::Cylindrical, 2) | (PauliMode::RhoZ { .. }, 1) => d_z(),
            (PauliMode::Bloch, 0) | (PauliMode::ThetaOnly { .. }, 0) => d_theta(x[0]),
            _ => unreachable!("parameter index checked above"),
        })
    }
}
