//! Control pulses ε(t): linear ramps, geometric fast-QUAD pulses that keep
//! `g_εε ε̇²` constant, the analytic two-level geodesic and the closed-form
//! Schrieffer-Wolff pulse.

mod interp;
mod quad;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use interp::MonotoneCubic;
pub use quad::integrate;

use crate::error::{Error, Result};
use crate::metric::{g_eps, historical_weight};
use crate::models::ParametricHamiltonian;

/// Relative tolerance of path-length quadratures.
pub const QUAD_REL_TOL: f64 = 1e-8;
/// Default number of samples along a synthesized pulse.
pub const DEFAULT_SAMPLES: usize = 20_001;
/// Allowed endpoint miss, relative to `|ε_f - ε_0|`.
pub const ENDPOINT_TOL: f64 = 1e-4;
/// Fraction of the schedule over which the residual endpoint miss is spread.
pub const CLAMP_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Linear,
    Geometric,
    /// Fast-QUAD with the older `|⟨n|∂H|0⟩|/ΔE²` speed weight.
    Historical,
    SwClosedForm,
    AnalyticTwoLevel,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Linear => "linear",
            Protocol::Geometric => "geometric",
            Protocol::Historical => "historical",
            Protocol::SwClosedForm => "sw_closed_form",
            Protocol::AnalyticTwoLevel => "analytic_two_level",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "linear" => Protocol::Linear,
            "geometric" | "geo" => Protocol::Geometric,
            "historical" => Protocol::Historical,
            "sw" | "sw_closed_form" => Protocol::SwClosedForm,
            "analytic" | "analytic_two_level" => Protocol::AnalyticTwoLevel,
            other => return Err(Error::Config(format!("unknown protocol {other:?}"))),
        })
    }
}

/// Speed weight of a fast-QUAD pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// `√g_εε`.
    #[default]
    Geometric,
    /// `√(Σ |⟨n|∂H|0⟩|² / ΔE⁴)`.
    Historical,
}

impl Weight {
    pub fn eval(self, model: &dyn ParametricHamiltonian, eps: f64, level: usize) -> Result<f64> {
        match self {
            Weight::Geometric => g_eps(model, eps, level).map(f64::sqrt),
            Weight::Historical => historical_weight(model, eps, level),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FastQuadOptions {
    pub samples: usize,
    pub level: usize,
    pub weight: Weight,
}

impl Default for FastQuadOptions {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, level: 0, weight: Weight::Geometric }
    }
}

/// A detuning schedule ε(t) on `[0, t_f]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseSchedule {
    pub t_f: f64,
    pub eps0: f64,
    pub eps_f: f64,
    /// Adiabaticity `L / t_f` (zero for protocols without one).
    pub delta: f64,
    pub protocol: Protocol,
    pub metadata: BTreeMap<String, Value>,
    curve: MonotoneCubic,
}

impl PulseSchedule {
    fn from_samples(
        t_f: f64,
        times: Vec<f64>,
        eps: Vec<f64>,
        delta: f64,
        protocol: Protocol,
        metadata: BTreeMap<String, Value>,
    ) -> Result<Self> {
        let eps0 = eps[0];
        let eps_f = *eps.last().unwrap();
        Ok(Self { t_f, eps0, eps_f, delta, protocol, metadata, curve: MonotoneCubic::new(times, eps)? })
    }

    /// A schedule through the given samples, e.g. read back from a file.
    /// Times must start at zero and increase strictly.
    pub fn from_points(times: Vec<f64>, eps: Vec<f64>, protocol: Protocol) -> Result<Self> {
        if times.len() < 2 || times.len() != eps.len() {
            return Err(Error::ShapeMismatch(format!("{} times for {} values", times.len(), eps.len())));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidParameter(format!("schedule must start at t = 0, got {}", times[0])));
        }
        let t_f = *times.last().unwrap();
        check_tf(t_f)?;
        let mut meta = BTreeMap::new();
        meta.insert("source".into(), json!("points"));
        Self::from_samples(t_f, times, eps, 0.0, protocol, meta)
    }

    /// ε at time `t` (held at the boundary values outside `[0, t_f]`).
    pub fn eps(&self, t: f64) -> f64 {
        self.curve.eval(t)
    }

    pub fn rate(&self, t: f64) -> f64 {
        self.curve.derivative(t)
    }

    pub fn times(&self) -> &[f64] {
        self.curve.xs()
    }

    pub fn values(&self) -> &[f64] {
        self.curve.ys()
    }

    pub fn len(&self) -> usize {
        self.times().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every value offset by `d` (boundaries included).
    pub fn shifted(&self, d: f64) -> Result<Self> {
        let mut metadata = self.metadata.clone();
        metadata.insert("additive_offset".into(), json!(d));
        let values = self.values().iter().map(|v| v + d).collect();
        Self::from_samples(self.t_f, self.times().to_vec(), values, self.delta, self.protocol, metadata)
    }

    /// Same shape played over `t_f`: ε'(t) = ε(t · t_f_old / t_f).
    pub fn rescaled(&self, t_f: f64) -> Result<Self> {
        check_tf(t_f)?;
        let s = t_f / self.t_f;
        let times: Vec<f64> = self.times().iter().map(|t| t * s).collect();
        let mut metadata = self.metadata.clone();
        metadata.insert("rescaled_from_t_f".into(), json!(self.t_f));
        Self::from_samples(t_f, times, self.values().to_vec(), self.delta / s, self.protocol, metadata)
    }
}

fn check_tf(t_f: f64) -> Result<()> {
    if !(t_f > 0.0) || !t_f.is_finite() {
        return Err(Error::InvalidParameter(format!("t_f must be positive, got {t_f}")));
    }
    Ok(())
}

fn check_eps(eps0: f64, eps_f: f64) -> Result<()> {
    if !eps0.is_finite() || !eps_f.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite boundary ({eps0}, {eps_f})")));
    }
    Ok(())
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 samples, got {samples}")));
    }
    Ok(())
}

fn uniform_times(t_f: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t_f * k as f64 / (n - 1) as f64).collect()
}

fn constant_pulse(eps: f64, t_f: f64, protocol: Protocol) -> Result<PulseSchedule> {
    PulseSchedule::from_samples(t_f, vec![0.0, t_f], vec![eps, eps], 0.0, protocol, BTreeMap::new())
}

/// `∫ w(ε) dε` between the boundaries, as a positive length.
fn weighted_length(w: &impl Fn(f64) -> Result<f64>, eps0: f64, eps_f: f64) -> Result<f64> {
    integrate(w, eps0.min(eps_f), eps0.max(eps_f), QUAD_REL_TOL)
}

/// Path length `∫ √g_εε dε` between the boundaries.
pub fn path_length(model: &dyn ParametricHamiltonian, eps0: f64, eps_f: f64, level: usize) -> Result<f64> {
    check_eps(eps0, eps_f)?;
    weighted_length(&|e| Weight::Geometric.eval(model, e, level), eps0, eps_f)
}

/// `δ = L / t_f`.
pub fn adiabaticity(model: &dyn ParametricHamiltonian, eps0: f64, eps_f: f64, t_f: f64, level: usize) -> Result<f64> {
    check_tf(t_f)?;
    Ok(path_length(model, eps0, eps_f, level)? / t_f)
}

/// RK4 integration of `dε/dt = ±rate / w(ε)` on `n` uniform samples.
fn rk4(w: &impl Fn(f64) -> Result<f64>, eps0: f64, sign_rate: f64, t_f: f64, n: usize) -> Result<Vec<f64>> {
    let h = t_f / (n - 1) as f64;
    let rhs = |e: f64| -> Result<f64> {
        let v = w(e)?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::SingularMetric { at: e });
        }
        Ok(sign_rate / v)
    };
    let mut out = Vec::with_capacity(n);
    let mut e = eps0;
    out.push(e);
    for _ in 1..n {
        let k1 = rhs(e)?;
        let k2 = rhs(e + 0.5 * h * k1)?;
        let k3 = rhs(e + 0.5 * h * k2)?;
        let k4 = rhs(e + h * k3)?;
        e += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(e);
    }
    Ok(out)
}

/// Integrates `w(ε) dε/dt = const` from `eps0` to `eps_f` in time `t_f`.
/// Returns the samples, `∫w dε` and solver metadata.
fn synthesize(
    w: impl Fn(f64) -> Result<f64>,
    eps0: f64,
    eps_f: f64,
    t_f: f64,
    samples: usize,
) -> Result<(Vec<f64>, Vec<f64>, f64, BTreeMap<String, Value>)> {
    let length = weighted_length(&w, eps0, eps_f)?;
    let span = (eps_f - eps0).abs();
    let rate = (eps_f - eps0).signum() * length / t_f;
    let mut eps = rk4(&w, eps0, rate, t_f, samples)?;
    let mut miss = (eps[samples - 1] - eps_f).abs();
    let mut refined = false;
    if miss > ENDPOINT_TOL * span {
        // one Richardson pass: halve the step and extrapolate on the coarse grid
        let fine = rk4(&w, eps0, rate, t_f, 2 * samples - 1)?;
        for (k, e) in eps.iter_mut().enumerate() {
            *e = (16.0 * fine[2 * k] - *e) / 15.0;
        }
        miss = (eps[samples - 1] - eps_f).abs();
        refined = true;
        if miss > ENDPOINT_TOL * span {
            return Err(Error::EndpointMiss { reached: eps[samples - 1], target: eps_f });
        }
    }
    // spread the residual miss linearly over the last CLAMP_FRACTION of samples
    let residual = eps_f - eps[samples - 1];
    let width = ((samples as f64 * CLAMP_FRACTION).ceil() as usize).clamp(1, samples - 1);
    let start = samples - 1 - width;
    for (j, e) in eps[start..].iter_mut().enumerate() {
        *e += residual * j as f64 / width as f64;
    }
    let mut meta = BTreeMap::new();
    meta.insert("samples".into(), json!(samples));
    meta.insert("integrator".into(), json!("rk4"));
    meta.insert("richardson_refined".into(), json!(refined));
    meta.insert("endpoint_residual".into(), json!(residual));
    meta.insert("clamp_samples".into(), json!(width));
    meta.insert("path_length".into(), json!(length));
    Ok((uniform_times(t_f, samples), eps, length, meta))
}

/// Geometric fast-QUAD pulse: `g_εε(ε) ε̇² = δ²` with `δ = L / t_f`.
pub fn solve_fast_quad(
    model: &dyn ParametricHamiltonian,
    eps0: f64,
    eps_f: f64,
    t_f: f64,
    opts: &FastQuadOptions,
) -> Result<PulseSchedule> {
    check_tf(t_f)?;
    check_eps(eps0, eps_f)?;
    check_samples(opts.samples)?;
    if model.num_params() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "fast-QUAD needs a single-parameter model, got {}",
            model.num_params()
        )));
    }
    let protocol = match opts.weight {
        Weight::Geometric => Protocol::Geometric,
        Weight::Historical => Protocol::Historical,
    };
    if eps0 == eps_f {
        return constant_pulse(eps0, t_f, protocol);
    }
    let (level, weight) = (opts.level, opts.weight);
    let (t, e, length, mut meta) = synthesize(|x| weight.eval(model, x, level), eps0, eps_f, t_f, opts.samples)?;
    meta.insert("level".into(), json!(level));
    PulseSchedule::from_samples(t_f, t, e, length / t_f, protocol, meta)
}

/// Largest relative deviation of the conserved speed `w(ε)² ε̇²` from `δ²`
/// over interior samples, skipping the endpoint clamp region.
pub fn speed_defect(model: &dyn ParametricHamiltonian, schedule: &PulseSchedule, level: usize) -> Result<f64> {
    let weight = match schedule.protocol {
        Protocol::Geometric => Weight::Geometric,
        Protocol::Historical => Weight::Historical,
        other => return Err(Error::InvalidParameter(format!("protocol {other} has no conserved speed"))),
    };
    let (t, e) = (schedule.times(), schedule.values());
    let guard = (t.len() as f64 * CLAMP_FRACTION).ceil() as usize + 1;
    if schedule.delta == 0.0 || t.len() < guard + 3 {
        return Ok(0.0);
    }
    let d2 = schedule.delta * schedule.delta;
    let mut worst: f64 = 0.0;
    for k in 1..t.len() - 1 - guard {
        let v = (e[k + 1] - e[k - 1]) / (t[k + 1] - t[k - 1]);
        let w = weight.eval(model, e[k], level)?;
        worst = worst.max((w * w * v * v / d2 - 1.0).abs());
    }
    Ok(worst)
}

/// Builds a model-driven pulse: linear, geometric or historical fast-QUAD.
pub fn build_pulse(
    model: &dyn ParametricHamiltonian,
    protocol: Protocol,
    eps0: f64,
    eps_f: f64,
    t_f: f64,
    samples: usize,
    level: usize,
) -> Result<PulseSchedule> {
    let weight = match protocol {
        Protocol::Linear => return linear_pulse(eps0, eps_f, t_f),
        Protocol::Geometric => Weight::Geometric,
        Protocol::Historical => Weight::Historical,
        other => {
            return Err(Error::InvalidParameter(format!("protocol {other} is not built from a model")));
        }
    };
    solve_fast_quad(model, eps0, eps_f, t_f, &FastQuadOptions { samples, level, weight })
}

/// `ε(t) = ε_0 + (ε_f - ε_0) t / t_f`.
pub fn linear_pulse(eps0: f64, eps_f: f64, t_f: f64) -> Result<PulseSchedule> {
    check_tf(t_f)?;
    check_eps(eps0, eps_f)?;
    PulseSchedule::from_samples(t_f, vec![0.0, t_f], vec![eps0, eps_f], 0.0, Protocol::Linear, BTreeMap::new())
}

/// Two-level geodesic in the polar angle: `θ(t) = θ_0 + (θ_f - θ_0) t / t_f`,
/// with `δ = |θ_f - θ_0| / (2 t_f)` from `g_θθ = 1/4`.
pub fn analytic_two_level(theta0: f64, theta_f: f64, t_f: f64) -> Result<PulseSchedule> {
    check_tf(t_f)?;
    check_eps(theta0, theta_f)?;
    let mut meta = BTreeMap::new();
    meta.insert("coordinate".into(), json!("theta"));
    let delta = (theta_f - theta0).abs() / (2.0 * t_f);
    PulseSchedule::from_samples(t_f, vec![0.0, t_f], vec![theta0, theta_f], delta, Protocol::AnalyticTwoLevel, meta)
}

/// The two-level geodesic expressed in `ρ = z tan θ` for the Pauli model with
/// fixed `z` (θ = atan2(ρ, z)).
pub fn analytic_rho_pulse(z: f64, rho0: f64, rho_f: f64, t_f: f64, samples: usize) -> Result<PulseSchedule> {
    check_tf(t_f)?;
    check_eps(rho0, rho_f)?;
    check_samples(samples)?;
    if !(z > 0.0) {
        return Err(Error::InvalidParameter(format!("z must be positive, got {z}")));
    }
    let (th0, th_f) = (rho0.atan2(z), rho_f.atan2(z));
    let times = uniform_times(t_f, samples);
    let mut rho: Vec<f64> = times.iter().map(|t| z * (th0 + (th_f - th0) * t / t_f).tan()).collect();
    rho[0] = rho0;
    rho[samples - 1] = rho_f;
    let mut meta = BTreeMap::new();
    meta.insert("coordinate".into(), json!("rho"));
    meta.insert("z".into(), json!(z));
    meta.insert("samples".into(), json!(samples));
    let delta = (th_f - th0).abs() / (2.0 * t_f);
    PulseSchedule::from_samples(t_f, times, rho, delta, Protocol::AnalyticTwoLevel, meta)
}

/// Expansion parameter above which the closed-form pulse is refused.
pub const SW_J_LIMIT: f64 = 0.5;
/// Expansion parameter above which a warning is logged.
pub const SW_J_WARN: f64 = 0.2;

/// Speed weight of the closed-form effective-model pulse, with Ω' = 2Ω:
/// `[(1 + 3J²) Ω'² + ε²] / (Ω'² + ε²)^{5/2}`.
pub fn sw_weight(omega: f64, j2: f64, eps: f64) -> f64 {
    let o2 = 4.0 * omega * omega;
    ((1.0 + 3.0 * j2) * o2 + eps * eps) / (o2 + eps * eps).powf(2.5)
}

/// Closed-form fast-QUAD pulse for the effective two-level model, with ε
/// measured from the S(2,0)–S(1,1) resonance.
pub fn sw_closed_form_pulse(
    omega: f64,
    de_z: f64,
    eps0: f64,
    eps_f: f64,
    t_f: f64,
    samples: usize,
) -> Result<PulseSchedule> {
    check_tf(t_f)?;
    check_eps(eps0, eps_f)?;
    check_samples(samples)?;
    if !(omega > 0.0) || !de_z.is_finite() {
        return Err(Error::InvalidParameter(format!("omega = {omega}, de_z = {de_z}")));
    }
    let j = (de_z / omega).abs();
    if j > SW_J_LIMIT {
        return Err(Error::ExpansionInvalid { j, limit: SW_J_LIMIT });
    }
    if j > SW_J_WARN {
        log::warn!("closed-form pulse at J = {j:.3}: second-order expansion is loose above {SW_J_WARN}");
    }
    if eps0 == eps_f {
        return constant_pulse(eps0, t_f, Protocol::SwClosedForm);
    }
    let j2 = j * j;
    let (t, e, length, mut meta) = synthesize(|x| Ok(sw_weight(omega, j2, x)), eps0, eps_f, t_f, samples)?;
    meta.insert("j".into(), json!(j));
    PulseSchedule::from_samples(t_f, t, e, omega * length / t_f, Protocol::SwClosedForm, meta)
}

#[cfg(test)]
mod tests;
