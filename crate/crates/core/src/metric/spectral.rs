use super::{check_level, GeoTensor};
use crate::error::Result;
use crate::linalg::{c64, eigensystem, EigenSystem};
use crate::models::ParametricHamiltonian;

/// Matrix elements `⟨ψ_n|∂_μH|ψ_level⟩` for every `n`, per parameter.
fn couplings(model: &dyn ParametricHamiltonian, x: &[f64], es: &EigenSystem, level: usize) -> Result<Vec<Vec<c64>>> {
    let psi = es.vector(level);
    (0..model.num_params())
        .map(|mu| {
            let dh = model.dh_at(x, mu)?;
            let v = dh.mul_vec(&psi);
            Ok((0..es.dim()).map(|n| es.vectors.column(n).iter().zip(&v).map(|(a, b)| a.conj() * b).sum()).collect())
        })
        .collect()
}

/// Sum-over-states geometric tensor of eigenstate `level`:
/// `q_μν = Σ_{n≠level} ⟨l|∂_μH|n⟩⟨n|∂_νH|l⟩ / (E_n - E_l)²`.
pub fn qgt_spectral(model: &dyn ParametricHamiltonian, x: &[f64], level: usize) -> Result<GeoTensor> {
    let es = eigensystem(&model.h_at(x)?)?;
    check_level(&es, level)?;
    let a = couplings(model, x, &es, level)?;
    let p = model.num_params();
    let mut gt = GeoTensor::zeros(p, level, x);
    for mu in 0..p {
        for nu in mu..p {
            let mut q = c64::new(0.0, 0.0);
            for n in (0..es.dim()).filter(|&n| n != level) {
                let de = es.values[n] - es.values[level];
                q += a[mu][n].conj() * a[nu][n] / (de * de);
            }
            gt.g[mu][nu] = q.re;
            gt.g[nu][mu] = q.re;
            gt.berry[mu][nu] = q.im;
            gt.berry[nu][mu] = -q.im;
        }
        gt.berry[mu][mu] = 0.0;
    }
    Ok(gt)
}

/// `g_εε` of a single-parameter model.
pub fn g_eps(model: &dyn ParametricHamiltonian, eps: f64, level: usize) -> Result<f64> {
    let es = eigensystem(&model.h_at(&[eps])?)?;
    check_level(&es, level)?;
    let a = &couplings(model, &[eps], &es, level)?[0];
    Ok((0..es.dim()).filter(|&n| n != level).map(|n| a[n].norm_sqr() / (es.values[n] - es.values[level]).powi(2)).sum())
}

/// Older fast-QUAD speed weight `√(Σ_{n≠l} |⟨n|∂_εH|l⟩|² / (E_n - E_l)⁴)`,
/// which falls off one power of the gap faster than `√g_εε`.
pub fn historical_weight(model: &dyn ParametricHamiltonian, eps: f64, level: usize) -> Result<f64> {
    let es = eigensystem(&model.h_at(&[eps])?)?;
    check_level(&es, level)?;
    let a = &couplings(model, &[eps], &es, level)?[0];
    Ok((0..es.dim())
        .filter(|&n| n != level)
        .map(|n| a[n].norm_sqr() / (es.values[n] - es.values[level]).powi(4))
        .sum::<f64>()
        .sqrt())
}
