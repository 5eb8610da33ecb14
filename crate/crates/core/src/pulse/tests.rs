use std::f64::consts::PI;

use super::*;
use crate::models::{Dqd3, DqdParams, PauliMode, PauliModel, Sw2};

fn dqd3() -> Dqd3 {
    Dqd3::new(DqdParams::three_level_default()).unwrap()
}

fn theta_model() -> PauliModel {
    PauliModel::new(PauliMode::ThetaOnly { phi: 0.0 })
}

fn opts(samples: usize) -> FastQuadOptions {
    FastQuadOptions { samples, ..Default::default() }
}

#[test]
fn constant_metric_length() {
    let l = path_length(&theta_model(), 0.3, 2.9, 0).unwrap();
    assert!((l - 1.3).abs() < 1e-12);
    assert_eq!(path_length(&theta_model(), 1.0, 1.0, 0).unwrap(), 0.0);
    let d = adiabaticity(&theta_model(), 0.0 + 1e-9, PI - 1e-9, PI, 0).unwrap();
    assert!((d - 0.5).abs() < 1e-8);
}

#[test]
fn dqd3_length_against_trapezoid() {
    let m = dqd3();
    let l = path_length(&m, 200.0, 0.0, 0).unwrap();
    let n = 1_000_000;
    let h = 200.0 / n as f64;
    let f = |k: usize| g_eps(&m, k as f64 * h, 0).unwrap().sqrt();
    let mut trap = 0.5 * (f(0) + f(n));
    for k in 1..n {
        trap += f(k);
    }
    trap *= h;
    assert!((l - trap).abs() < 1e-6 * trap, "{l} vs {trap}");
    let d20 = adiabaticity(&m, 200.0, 0.0, 20.0, 0).unwrap();
    let d40 = adiabaticity(&m, 200.0, 0.0, 40.0, 0).unwrap();
    assert!((d20 - 2.0 * d40).abs() < 1e-14 * d20);
    // regression anchor
    assert!((d20 - 0.080_331_546_2).abs() < 1e-9, "δ = {d20}");
}

#[test]
fn constant_metric_gives_linear_ramp() {
    let p = solve_fast_quad(&theta_model(), 0.2, 2.8, 7.0, &opts(2001)).unwrap();
    let lin = linear_pulse(0.2, 2.8, 7.0).unwrap();
    for k in 0..=700 {
        let t = k as f64 * 0.01;
        assert!((p.eps(t) - lin.eps(t)).abs() < 1e-9);
    }
    let a = analytic_two_level(0.2, 2.8, 7.0).unwrap();
    assert!((a.eps(3.3) - p.eps(3.3)).abs() < 1e-9);
    assert!((a.delta - p.delta).abs() < 1e-9);
}

#[test]
fn rho_only_matches_analytic_geodesic() {
    let z = 0.1;
    let m = PauliModel::new(PauliMode::RhoOnly { phi: 0.0, z });
    let t_f = 10.0;
    let p = solve_fast_quad(&m, -10.0, 10.0, t_f, &FastQuadOptions::default()).unwrap();
    let a = analytic_rho_pulse(z, -10.0, 10.0, t_f, DEFAULT_SAMPLES).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..=4000 {
        let t = t_f * k as f64 / 4000.0;
        worst = worst
            .max((p.eps(t) - z * ((-10f64).atan2(z) + ((10f64).atan2(z) - (-10f64).atan2(z)) * t / t_f).tan()).abs());
        assert!((a.eps(t) - p.eps(t)).abs() < 1e-4 * z);
    }
    assert!(worst < 1e-4 * z, "{worst}");
    assert!((p.delta - a.delta).abs() < 1e-8);
}

#[test]
fn analytic_theta_pulse() {
    let p = analytic_two_level(0.0, PI, 1.0).unwrap();
    assert!((p.eps(0.5) - PI / 2.0).abs() < 1e-15);
    let r = analytic_two_level(PI, 0.0, 1.0).unwrap();
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        assert!((r.eps(t) - p.eps(1.0 - t)).abs() < 1e-14);
    }
}

#[test]
fn dqd3_pulse_slows_at_anticrossing() {
    let m = dqd3();
    let p = solve_fast_quad(&m, 200.0, 0.0, 20.0, &FastQuadOptions::default()).unwrap();
    let (t, e) = (p.times(), p.values());
    let (mut slowest, mut at) = (f64::INFINITY, 0.0);
    for k in 1..t.len() - 1 {
        let v = ((e[k + 1] - e[k - 1]) / (t[k + 1] - t[k - 1])).abs();
        if v < slowest {
            slowest = v;
            at = e[k];
        }
    }
    assert!((at - 100.0).abs() < 1.0, "slowest at ε = {at}");
    assert!((p.eps(0.0) - 200.0).abs() < 1e-12 && (p.eps(20.0)).abs() < 1e-12);
}

fn assert_conserved(model: &dyn ParametricHamiltonian, p: &PulseSchedule) {
    let (t, e) = (p.times(), p.values());
    let guard = (t.len() as f64 * CLAMP_FRACTION).ceil() as usize + 1;
    for k in 1..t.len() - 1 - guard {
        let v = (e[k + 1] - e[k - 1]) / (t[k + 1] - t[k - 1]);
        let c = g_eps(model, e[k], 0).unwrap() * v * v;
        assert!((c / (p.delta * p.delta) - 1.0).abs() < 1e-3, "sample {k}: {c} vs {}", p.delta * p.delta);
    }
    assert!(speed_defect(model, p, 0).unwrap() < 1e-3);
}

#[test]
fn killing_conservation() {
    let m = dqd3();
    assert_conserved(&m, &solve_fast_quad(&m, 200.0, 0.0, 20.0, &FastQuadOptions::default()).unwrap());
    let two = PauliModel::new(PauliMode::RhoOnly { phi: 0.0, z: 0.1 });
    assert_conserved(&two, &solve_fast_quad(&two, -10.0, 10.0, 5.0, &FastQuadOptions::default()).unwrap());
}

#[test]
fn time_reversal() {
    let m = dqd3();
    let fwd = solve_fast_quad(&m, 200.0, 0.0, 20.0, &FastQuadOptions::default()).unwrap();
    let rev = solve_fast_quad(&m, 0.0, 200.0, 20.0, &FastQuadOptions::default()).unwrap();
    for k in 0..=2000 {
        let t = 20.0 * k as f64 / 2000.0;
        assert!((rev.eps(t) - fwd.eps(20.0 - t)).abs() < 1e-6 * 200.0, "t = {t}");
    }
}

#[test]
fn refinement_convergence() {
    let m = dqd3();
    let n = 10_001;
    let a = solve_fast_quad(&m, 200.0, 0.0, 20.0, &opts(n)).unwrap();
    let b = solve_fast_quad(&m, 200.0, 0.0, 20.0, &opts(2 * n - 1)).unwrap();
    let worst = (0..n).map(|k| (a.values()[k] - b.values()[2 * k]).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-6 * 200.0, "{worst}");
}

#[test]
fn monotone_schedules() {
    let m = dqd3();
    let p = solve_fast_quad(&m, 200.0, 0.0, 20.0, &FastQuadOptions::default()).unwrap();
    assert!(p.values().windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn sw_landau_zener_limit_matches_generic_solver() {
    // at J = 0 the closed-form weight is (Ω'² + ε²)^{-3/2}, the older
    // |⟨1|∂H|0⟩|/ΔE² weight of the Landau-Zener model
    let sw = Sw2::new(2.0, 0.0).unwrap();
    let o = FastQuadOptions { weight: Weight::Historical, ..Default::default() };
    let generic = solve_fast_quad(&sw, 30.0, -30.0, 15.0, &o).unwrap();
    let closed = sw_closed_form_pulse(2.0, 0.0, 30.0, -30.0, 15.0, DEFAULT_SAMPLES).unwrap();
    for k in 0..=1500 {
        let t = k as f64 * 0.01;
        assert!((generic.eps(t) - closed.eps(t)).abs() <= 1e-3 * 60.0);
    }
}

#[test]
fn sw_weight_length_closed_form() {
    // ∫(a²+ε²)^{-3/2} dε = ε / (a² √(a²+ε²))
    let (omega, a) = (1.5, 3.0);
    let anti = |e: f64| e / (a * a * (a * a + e * e).sqrt());
    let l = integrate(|e| Ok(sw_weight(omega, 0.0, e)), -7.0, 11.0, 1e-12).unwrap();
    assert!((l - (anti(11.0) - anti(-7.0))).abs() < 1e-12);
}

#[test]
fn sw_limits() {
    assert!(matches!(sw_closed_form_pulse(1.0, 0.6, 5.0, -5.0, 1.0, 101), Err(Error::ExpansionInvalid { .. })));
    let c = sw_closed_form_pulse(1.0, 0.1, 5.0, 5.0, 1.0, 101).unwrap();
    assert_eq!(c.eps(0.4), 5.0);
}

#[test]
fn linear_examples() {
    assert_eq!(linear_pulse(0.0, 10.0, 10.0).unwrap().eps(5.0), 5.0);
    assert_eq!(linear_pulse(200.0, 0.0, 20.0).unwrap().eps(10.0), 100.0);
    assert_eq!(linear_pulse(3.0, 3.0, 1.0).unwrap().eps(0.7), 3.0);
    assert!(linear_pulse(0.0, 1.0, 0.0).is_err());
}

#[test]
fn rescaling_is_exact_reparametrization() {
    let m = dqd3();
    let p = solve_fast_quad(&m, 200.0, 0.0, 20.0, &opts(4001)).unwrap();
    let q = p.rescaled(5.0).unwrap();
    let fresh = solve_fast_quad(&m, 200.0, 0.0, 5.0, &opts(4001)).unwrap();
    assert!((q.delta - 4.0 * p.delta).abs() < 1e-12);
    for k in 0..=100 {
        let t = 0.05 * k as f64;
        assert!((q.eps(t) - p.eps(4.0 * t)).abs() < 1e-12);
        assert!((q.eps(t) - fresh.eps(t)).abs() < 1e-6 * 200.0);
    }
}

#[test]
fn from_points_round_trip() {
    let p = solve_fast_quad(&dqd3(), 200.0, 0.0, 20.0, &opts(2001)).unwrap();
    let q = PulseSchedule::from_points(p.times().to_vec(), p.values().to_vec(), Protocol::Geometric).unwrap();
    assert_eq!(q.eps(7.3), p.eps(7.3));
    assert!(PulseSchedule::from_points(vec![1.0, 2.0], vec![0.0, 1.0], Protocol::Linear).is_err());
}

#[test]
fn protocol_names_round_trip() {
    for p in [
        Protocol::Linear,
        Protocol::Geometric,
        Protocol::Historical,
        Protocol::SwClosedForm,
        Protocol::AnalyticTwoLevel,
    ] {
        assert_eq!(p.name().parse::<Protocol>().unwrap(), p);
    }
    assert!("fast".parse::<Protocol>().is_err());
}
