//! Quantum geometric tensor: the spectral sum-over-states form, a projector
//! derivative form used as an independent check, an overlap-based
//! finite-difference oracle, and coordinate pullbacks.

mod spectral;
mod tangent;

pub use spectral::{g_eps, historical_weight, qgt_spectral};
pub use tangent::{qgt_fd_oracle, qgt_tangent};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigensystem, ComplexMatrix, EigenSystem};

/// Relative gap below which a level counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// `q_μν = g_μν + iΩ_μν` of one eigenstate at a parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeoTensor {
    /// Real symmetric metric.
    pub g: Vec<Vec<f64>>,
    /// Real antisymmetric Berry curvature.
    pub berry: Vec<Vec<f64>>,
    pub level: usize,
    pub x: Vec<f64>,
}

impl GeoTensor {
    pub fn zeros(n: usize, level: usize, x: &[f64]) -> Self {
        Self { g: vec![vec![0.0; n]; n], berry: vec![vec![0.0; n]; n], level, x: x.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    /// Smallest eigenvalue of `g`; non-negative up to rounding.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let flat: Vec<f64> = self.g.iter().flatten().copied().collect();
        let m = ComplexMatrix::from_real(n, n, &flat).expect("finite metric");
        eigensystem(&m.hermitian_part()).map(|es| es.values[0]).unwrap_or(f64::NAN)
    }

    /// Largest `|g_μν|`.
    pub fn scale(&self) -> f64 {
        self.g.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Largest `|g_μν - g_νμ|` and `|Ω_μν + Ω_νμ|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                d = d.max((self.g[i][j] - self.g[j][i]).abs());
                d = d.max((self.berry[i][j] + self.berry[j][i]).abs());
            }
        }
        d
    }
}

/// Determinant of the metric and whether it counts as singular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Singularity {
    pub det: f64,
    pub singular: bool,
}

/// `det g`, flagged singular when `|det g| < 1e-12 · (max |g_μν|)^n`.
pub fn check_singular(gt: &GeoTensor) -> Singularity {
    let n = gt.dim();
    let det = determinant(&gt.g);
    let scale = gt.scale().powi(n as i32);
    Singularity { det, singular: scale == 0.0 || det.abs() < 1e-12 * scale }
}

fn determinant(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// Pulls the tensor back along `x = x(y)`: `g' = Jᵀ g J`, `Ω' = Jᵀ Ω J`
/// where `J[μ][a] = ∂x^μ/∂y^a`. The stored point is left as given.
pub fn pullback(gt: &GeoTensor, jacobian: &[Vec<f64>]) -> Result<GeoTensor> {
    let n = gt.dim();
    if jacobian.len() != n {
        return Err(Error::ShapeMismatch(format!("jacobian has {} rows, metric is {n}x{n}", jacobian.len())));
    }
    let m = jacobian.first().map_or(0, Vec::len);
    if jacobian.iter().any(|r| r.len() != m) {
        return Err(Error::ShapeMismatch("ragged jacobian".into()));
    }
    if jacobian.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite jacobian".into()));
    }
    let transform = |t: &[Vec<f64>]| {
        let mut out = vec![vec![0.0; m]; m];
        for a in 0..m {
            for b in 0..m {
                let mut acc = 0.0;
                for mu in 0..n {
                    for nu in 0..n {
                        acc += jacobian[mu][a] * t[mu][nu] * jacobian[nu][b];
                    }
                }
                out[a][b] = acc;
            }
        }
        out
    };
    Ok(GeoTensor { g: transform(&gt.g), berry: transform(&gt.berry), level: gt.level, x: gt.x.clone() })
}

pub(crate) fn check_level(es: &EigenSystem, level: usize) -> Result<()> {
    if level >= es.dim() {
        return Err(Error::ShapeMismatch(format!("level {level} out of range for dimension {}", es.dim())));
    }
    let gap = es.gap(level);
    if !(gap > DEGENERACY_TOL * es.spectral_norm()) || gap == 0.0 {
        return Err(Error::DegenerateSpectrum { level, gap });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{PauliMode, PauliModel};

    #[test]
    fn identity_pullback_is_noop() {
        let m = PauliModel::new(PauliMode::Cylindrical);
        let gt = qgt_spectral(&m, &[0.7, 0.3, 0.4], 0).unwrap();
        let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(pullback(&gt, &id).unwrap(), gt);
    }

    #[test]
    fn tan_substitution_gives_bloch_metric() {
        let m = PauliModel::new(PauliMode::RhoPhi { z: 1.0 });
        for theta in [0.2f64, 0.7, 1.3] {
            let gt = qgt_spectral(&m, &[theta.tan(), 0.4], 0).unwrap();
            let sec2 = 1.0 / theta.cos().powi(2);
            let p = pullback(&gt, &[vec![sec2, 0.0], vec![0.0, 1.0]]).unwrap();
            assert!((p.g[0][0] - 0.25).abs() < 1e-12);
            assert!((p.g[1][1] - theta.sin().powi(2) / 4.0).abs() < 1e-12);
            assert!(p.g[0][1].abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_jacobian_column_is_singular() {
        let m = PauliModel::new(PauliMode::RhoPhi { z: 1.0 });
        let gt = qgt_spectral(&m, &[0.8, 0.1], 0).unwrap();
        let p = pullback(&gt, &[vec![1.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert!(check_singular(&p).singular);
        assert!(check_singular(&p).det.abs() < 1e-12);
    }

    #[test]
    fn pullback_shape_checked() {
        let gt = GeoTensor::zeros(2, 0, &[0.0, 0.0]);
        assert!(matches!(pullback(&gt, &[vec![1.0]]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn rho_z_subspace_is_singular() {
        let m = PauliModel::new(PauliMode::RhoZ { phi: 0.3 });
        let gt = qgt_spectral(&m, &[0.9, 1.7], 0).unwrap();
        assert!(check_singular(&gt).singular);
    }

    #[test]
    fn rho_phi_determinant_closed_form() {
        let m = PauliModel::new(PauliMode::RhoPhi { z: 1.0 });
        for rho in [0.3f64, 1.0, 2.5] {
            let s = check_singular(&qgt_spectral(&m, &[rho, 0.2], 0).unwrap());
            let expect = rho * rho / (16.0 * (1.0 + rho * rho).powi(3));
            assert!(!s.singular);
            assert!((s.det - expect).abs() < 1e-12 * expect.max(1e-3));
        }
    }

    #[test]
    fn zero_tensor_is_singular() {
        assert!(check_singular(&GeoTensor::zeros(2, 0, &[0.0, 0.0])).singular);
    }

    #[test]
    fn determinant_oracle() {
        let m = vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]];
        // 2(12-1) - 1(4-0) = 18
        assert!((determinant(&m) - 18.0).abs() < 1e-12);
    }
}
