use std::collections::BTreeMap;

use super::{check_mu, check_point, ParametricHamiltonian};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Effective two-level singlet model after eliminating T₀(1,1) to second
/// order in `J = ΔE_Z / Ω`:
///
/// ```text
/// [[-ε(1-J²),   Ω(1-J²/2)],
///  [Ω(1-J²/2),  0        ]]
/// ```
///
/// Here ε is measured from the S(2,0)–S(1,1) resonance.
#[derive(Debug, Clone)]
pub struct Sw2 {
    omega: f64,
    de_z: f64,
    j2: f64,
}

impl Sw2 {
    pub fn new(omega: f64, de_z: f64) -> Result<Self> {
        if !omega.is_finite() || !de_z.is_finite() || omega == 0.0 {
            return Err(Error::InvalidParameter(format!("omega = {omega}, de_z = {de_z}")));
        }
        let j = (de_z / omega).abs();
        if j >= 1.0 {
            return Err(Error::ExpansionInvalid { j, limit: 1.0 });
        }
        Ok(Self { omega, de_z, j2: j * j })
    }

    /// Expansion parameter J².
    pub fn j_squared(&self) -> f64 {
        self.j2
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn de_z(&self) -> f64 {
        self.de_z
    }
}

impl ParametricHamiltonian for Sw2 {
    fn dim(&self) -> usize {
        2
    }

    fn param_names(&self) -> Vec<String> {
        vec!["epsilon".into()]
    }

    fn fixed_params(&self) -> BTreeMap<String, f64> {
        [("omega".to_string(), self.omega), ("de_z".to_string(), self.de_z)].into_iter().collect()
    }

    fn h_at(&self, x: &[f64]) -> Result<ComplexMatrix> {
        check_point(self, x)?;
        let off = self.omega * (1.0 - self.j2 / 2.0);
        ComplexMatrix::from_real(2, 2, &[-x[0] * (1.0 - self.j2), off, off, 0.0])
    }

    fn dh_at(&self, x: &[f64], mu: usize) -> Result<ComplexMatrix> {
        check_point(self, x)?;
        check_mu(self, mu)?;
        Ok(ComplexMatrix::from_diag(&[-(1.0 - self.j2), 0.0]))
    }

    fn basis_labels(&self) -> Vec<String> {
        vec!["S(2,0)".into(), "S(1,1)".into()]
    }
}
