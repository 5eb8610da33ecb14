use std::collections::BTreeMap;
use std::sync::Arc;

use super::{check_mu, check_point, ParametricHamiltonian};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

type MatrixFn = dyn Fn(&[f64]) -> ComplexMatrix + Send + Sync;

/// Model given only by `H(x)`; derivatives come from fourth-order central
/// differences.
pub struct FiniteDifferenceModel {
    dim: usize,
    names: Vec<String>,
    h: Box<MatrixFn>,
    step: f64,
}

impl FiniteDifferenceModel {
    pub fn new(dim: usize, names: Vec<String>, h: impl Fn(&[f64]) -> ComplexMatrix + Send + Sync + 'static) -> Self {
        Self { dim, names, h: Box::new(h), step: 1e-3 }
    }

    /// Relative difference step (default 1e-3, scaled by `max(1, |x_μ|)`).
    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }
}

impl ParametricHamiltonian for FiniteDifferenceModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn param_names(&self) -> Vec<String> {
        self.names.clone()
    }

    fn h_at(&self, x: &[f64]) -> Result<ComplexMatrix> {
        check_point(self, x)?;
        let h = (self.h)(x);
        if h.rows() != self.dim || h.cols() != self.dim {
            return Err(Error::ShapeMismatch(format!(
                "closure returned {}x{}, expected {}",
                h.rows(),
                h.cols(),
                self.dim
            )));
        }
        Ok(h)
    }

    fn dh_at(&self, x: &[f64], mu: usize) -> Result<ComplexMatrix> {
        check_point(self, x)?;
        check_mu(self, mu)?;
        let h = self.step * x[mu].abs().max(1.0);
        let at = |k: f64| {
            let mut y = x.to_vec();
            y[mu] += k * h;
            (self.h)(&y)
        };
        // (-f(x+2h) + 8f(x+h) - 8f(x-h) + f(x-2h)) / 12h
        let num = &(&at(1.0).scale_real(8.0) - &at(-1.0).scale_real(8.0)) - &(&at(2.0) - &at(-2.0));
        Ok(num.scale_real(1.0 / (12.0 * h)).hermitian_part())
    }
}

/// `factor · H(x)`, used to switch between ordinary and angular frequency
/// units.
pub struct ScaledModel {
    inner: Arc<dyn ParametricHamiltonian>,
    factor: f64,
}

impl ScaledModel {
    pub fn new(inner: Arc<dyn ParametricHamiltonian>, factor: f64) -> Self {
        Self { inner, factor }
    }
}

impl ParametricHamiltonian for ScaledModel {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn param_names(&self) -> Vec<String> {
        self.inner.param_names()
    }

    fn fixed_params(&self) -> BTreeMap<String, f64> {
        let mut m = self.inner.fixed_params();
        m.insert("energy_factor".into(), self.factor);
        m
    }

    fn h_at(&self, x: &[f64]) -> Result<ComplexMatrix> {
        Ok(self.inner.h_at(x)?.scale_real(self.factor))
    }

    fn dh_at(&self, x: &[f64], mu: usize) -> Result<ComplexMatrix> {
        Ok(self.inner.dh_at(x, mu)?.scale_real(self.factor))
    }

    fn basis_labels(&self) -> Vec<String> {
        self.inner.basis_labels()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::testing::assert_fd_derivative;
    use crate::models::{PauliMode, PauliModel};

    #[test]
    fn finite_difference_fallback_matches_analytic() {
        let analytic = PauliModel::new(PauliMode::Cylindrical);
        let fd = FiniteDifferenceModel::new(2, vec!["rho".into(), "phi".into(), "z".into()], move |x: &[f64]| {
            PauliModel::new(PauliMode::Cylindrical).h_at(x).unwrap()
        });
        let x = [0.8, 1.3, -0.4];
        for mu in 0..3 {
            let a = analytic.dh_at(&x, mu).unwrap();
            let b = fd.dh_at(&x, mu).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-9);
        }
        assert_fd_derivative(&fd, &x, 1e-4, 1e-6);
    }

    #[test]
    fn scaled_model_scales_everything() {
        let inner: Arc<dyn ParametricHamiltonian> = Arc::new(PauliModel::new(PauliMode::Bloch));
        let s = ScaledModel::new(inner.clone(), 2.0 * std::f64::consts::PI);
        let x = [0.4, 0.1];
        let expect = inner.h_at(&x).unwrap().scale_real(2.0 * std::f64::consts::PI);
        assert!(s.h_at(&x).unwrap().max_abs_diff(&expect) < 1e-14);
        assert_fd_derivative(&s, &x, 1e-4, 1e-6);
    }

    #[test]
    fn wrong_closure_shape_is_reported() {
        let m = FiniteDifferenceModel::new(3, vec!["x".into()], |_: &[f64]| ComplexMatrix::identity(2));
        assert!(matches!(m.h_at(&[0.0]), Err(Error::ShapeMismatch(_))));
    }
}
