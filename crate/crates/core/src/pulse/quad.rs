use crate::error::{Error, Result};

const NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
// Gauss weights for the odd-indexed nodes above.
const GAUSS: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_DEPTH: usize = 40;

fn gk15(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = KRONROD[7] * fc;
    let mut g = GAUSS[3] * fc;
    for i in 0..7 {
        let fs = f(c - h * NODES[i])? + f(c + h * NODES[i])?;
        k += KRONROD[i] * fs;
        if i % 2 == 1 {
            g += GAUSS[i / 2] * fs;
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]` to relative
/// tolerance `rel_tol` (plus a tiny absolute floor).
pub fn integrate(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::QuadratureFailure { a, b });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (whole, _) = gk15(&mut f, lo, hi)?;
    // seed with a coarse split so narrow features are not stepped over
    let mut stack: Vec<(f64, f64, usize)> =
        (0..16).map(|k| (lo + (hi - lo) * k as f64 / 16.0, lo + (hi - lo) * (k + 1) as f64 / 16.0, 0)).collect();
    let mut total = 0.0;
    let mut scale = whole.abs();
    while let Some((x0, x1, depth)) = stack.pop() {
        let (v, err) = gk15(&mut f, x0, x1)?;
        if !v.is_finite() {
            return Err(Error::QuadratureFailure { a, b });
        }
        scale = scale.max(v.abs());
        let budget = rel_tol * scale * (x1 - x0) / (hi - lo);
        if err <= budget.max(1e-300) || err <= 1e-15 * v.abs() {
            total += v;
        } else if depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailure { a: x0, b: x1 });
        } else {
            let mid = 0.5 * (x0 + x1);
            stack.push((x0, mid, depth + 1));
            stack.push((mid, x1, depth + 1));
        }
    }
    Ok(sign * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_transcendental() {
        let v = integrate(|x| Ok(x.powi(5) - 2.0 * x), 0.0, 2.0, 1e-12).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
        let v = integrate(|x| Ok(x.sin()), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_lorentzian() {
        let w: f64 = 1e-3;
        let v = integrate(|x| Ok(w / (w * w + (x - 0.37) * (x - 0.37))), 0.0, 1.0, 1e-10).unwrap();
        let exact = (0.63 / w).atan() + (0.37 / w).atan();
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn reversed_limits() {
        let v = integrate(Ok, 1.0, 0.0, 1e-12).unwrap();
        assert!((v + 0.5).abs() < 1e-14);
        assert_eq!(integrate(Ok, 1.0, 1.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn errors_propagate() {
        let r = integrate(|_| Err(Error::SingularMetric { at: 0.0 }), 0.0, 1.0, 1e-8);
        assert!(matches!(r, Err(Error::SingularMetric { .. })));
        assert!(matches!(integrate(|x| Ok(1.0 / x), 0.0, 1.0, 1e-8), Err(Error::QuadratureFailure { .. })));
    }
}
