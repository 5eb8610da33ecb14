use super::matrix::{c64, ComplexMatrix};
use crate::error::{Error, Result};

/// Relative tolerance on `|H - H†|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order with orthonormal eigenvectors stored as the
/// columns of `vectors`.
///
/// Each eigenvector is gauge fixed: its largest-magnitude component (first one
/// on ties) is real and positive, so repeated calls on nearby matrices return
/// continuously varying vectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, n: usize) -> Vec<c64> {
        self.vectors.column(n)
    }

    /// Smallest distance from level `n` to any other level.
    pub fn gap(&self, n: usize) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != n)
            .map(|(_, &e)| (e - self.values[n]).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Spectral norm of the decomposed matrix.
    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().map(|e| e.abs()).fold(0.0, f64::max)
    }

    /// `Σ E_n |v_n⟩⟨v_n|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|e| c64::new(e, 0.0))
    }

    /// `Σ f(E_n) |v_n⟩⟨v_n|`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> c64) -> ComplexMatrix {
        let n = self.dim();
        let weights: Vec<c64> = self.values.iter().map(|&e| f(e)).collect();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = c64::new(0.0, 0.0);
                for k in 0..n {
                    acc += v[(i, k)] * weights[k] * v[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
pub fn eigensystem(h: &ComplexMatrix) -> Result<EigenSystem> {
    if !h.is_square() {
        return Err(Error::ShapeMismatch(format!("eigensystem needs a square matrix, got {}x{}", h.rows(), h.cols())));
    }
    if !h.is_finite() {
        return Err(Error::InvalidParameter("non-finite matrix entry".into()));
    }
    let dev = h.hermiticity_deviation();
    if dev > HERMITIAN_TOL * h.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    eigensystem_unchecked(h)
}

/// As [`eigensystem`] without the Hermiticity check; the strictly lower
/// triangle is taken as the conjugate of the upper one.
pub fn eigensystem_unchecked(h: &ComplexMatrix) -> Result<EigenSystem> {
    let n = h.rows();
    let mut a = h.clone();
    for i in 0..n {
        a[(i, i)] = c64::new(a[(i, i)].re, 0.0);
        for j in 0..i {
            a[(i, j)] = a[(j, i)].conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    let mut converged = n < 2 || scale == 0.0;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::ConvergenceFailure { sweeps });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        converged = off.sqrt() <= 1e-15 * scale;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut vec = v.column(src);
        gauge_fix(&mut vec);
        for (row, z) in vec.into_iter().enumerate() {
            vectors[(row, col)] = z;
        }
    }
    Ok(EigenSystem { values, vectors })
}

/// Zeroes `a[p][q]` with a unitary rotation in the (p, q) plane, accumulating
/// it into `v`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if r < 1e-300 || r <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = c64::new(0.0, 0.0);
        a[(q, p)] = c64::new(0.0, 0.0);
        return;
    }
    let phase = apq / r; // e^{iφ}
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let pc = phase.conj();
    let g_pp = c64::new(c, 0.0);
    let g_pq = c64::new(s, 0.0);
    let g_qp = pc * (-s);
    let g_qq = pc * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = c64::new(0.0, 0.0);
    a[(q, p)] = c64::new(0.0, 0.0);
    a[(p, p)] = c64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = c64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

fn gauge_fix(v: &mut [c64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    // first component within rounding of the maximum, so near-ties resolve the same way
    let k = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-12)).unwrap_or(0);
    let phase = v[k].conj() / v[k].norm();
    let norm = super::norm(v);
    for z in v.iter_mut() {
        *z = *z * phase / norm;
    }
    v[k] = c64::new(v[k].re, 0.0);
}
