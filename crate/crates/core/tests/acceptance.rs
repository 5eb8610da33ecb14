//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use geoquad::dynamics::{
    dephasing_jump, lindblad_rhs, lindblad_superoperator, lindblad_transfer_fidelity, ChargeLayout, DephasingVariant,
    JumpOperator, LindbladOptions,
};
use geoquad::harness::{
    csv_string, json_string, run_experiment, run_fig2, run_fig3, run_optimal_time, run_quasistatic, run_transfer_grid,
    AxisSpec, ExperimentConfig, ExperimentKind, ExperimentReport,
};
use geoquad::linalg::{c64, eigensystem, vec_row, ComplexMatrix};
use geoquad::metric::{qgt_fd_oracle, qgt_spectral};
use geoquad::models::{Dqd3, Dqd6, DqdParams, ParametricHamiltonian, PauliMode, PauliModel, Sw2};
use geoquad::noise::{OffsetSource, PerturbationMode, QuasistaticSpec};
use geoquad::pulse::{analytic_rho_pulse, build_pulse, linear_pulse, sw_closed_form_pulse, Protocol, PulseSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Suite {
    failures: usize,
}

impl Suite {
    fn run(&mut self, id: u32, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let caught = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f));
        let elapsed = start.elapsed();
        let mut o = caught.unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if let Some(b) = budget {
            if elapsed > b {
                o.pass = false;
                o.detail.push_str(&format!("; over the {:?} budget", b));
            }
        }
        if !o.pass {
            self.failures += 1;
        }
        println!(
            "{} criterion {id:>2} {name}: {} [{:.2}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn series(r: &ExperimentReport, name: &str) -> Vec<f64> {
    r.values(name).unwrap_or_else(|| panic!("missing series {name}"))
}

fn sup_diff(a: &PulseSchedule, b: &PulseSchedule, n: usize) -> f64 {
    (0..=n)
        .map(|k| {
            let t = a.t_f * k as f64 / n as f64;
            (a.eps(t) - b.eps(t)).abs()
        })
        .fold(0.0, f64::max)
}

fn crit1() -> Outcome {
    let m = PauliModel::new(PauliMode::Bloch);
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let theta = r.gen_range(0.05..PI - 0.05);
        let phi = r.gen_range(0.0..2.0 * PI);
        let g = qgt_spectral(&m, &[theta, phi], 0).unwrap().g;
        let want = [[0.25, 0.0], [0.0, theta.sin().powi(2) / 4.0]];
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((g[i][j] - want[i][j]).abs());
            }
        }
    }
    outcome(worst < 1e-10, format!("max |g - diag(1/4, sin²θ/4)| = {worst:.2e}"))
}

/// Worst relative disagreement between the spectral tensor and the overlap
/// oracle along coordinate and diagonal directions.
fn oracle_error(model: &dyn ParametricHamiltonian, x: &[f64]) -> f64 {
    let n = x.len();
    let g = qgt_spectral(model, x, 0).unwrap().g;
    let es = eigensystem(&model.h_at(x).unwrap()).unwrap();
    let dh = (0..n).map(|mu| model.dh_at(x, mu).unwrap().frobenius_norm()).fold(0.0, f64::max);
    let step = 1e-3 * es.gap(0) / dh.max(1e-300);
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in a..n {
            let mut d = vec![0.0; n];
            d[a] += step;
            d[b] += step;
            let norm2: f64 = d.iter().map(|v| v * v).sum();
            let quad: f64 = (0..n).map(|i| (0..n).map(|j| g[i][j] * d[i] * d[j]).sum::<f64>()).sum::<f64>() / norm2;
            let scale = (g[a][a].abs() + g[b][b].abs()) / 2.0;
            let fd = qgt_fd_oracle(model, x, &d, 0).unwrap();
            worst = worst.max((fd - quad).abs() / scale.max(1e-300));
        }
    }
    worst
}

fn crit2() -> Outcome {
    let mut r = rng(2);
    let pauli = PauliModel::new(PauliMode::Cylindrical);
    let dqd3 = Dqd3::new(DqdParams::three_level_default()).unwrap();
    let dqd6 = Dqd6::new(DqdParams::six_level_default()).unwrap();
    let mut worst = [0.0f64; 3];
    for _ in 0..20 {
        let x = [r.gen_range(0.1..2.0), r.gen_range(0.0..2.0 * PI), r.gen_range(-2.0..2.0)];
        worst[0] = worst[0].max(oracle_error(&pauli, &x));
        worst[1] = worst[1].max(oracle_error(&dqd3, &[r.gen_range(0.0..200.0)]));
        worst[2] = worst[2].max(oracle_error(&dqd6, &[r.gen_range(10.0..150.0)]));
    }
    let pass = worst.iter().all(|w| *w < 1e-4);
    outcome(pass, format!("max relative error pauli {:.2e}, dqd3 {:.2e}, dqd6 {:.2e}", worst[0], worst[1], worst[2]))
}

fn crit3(fig2: &ExperimentReport) -> (Outcome, f64) {
    let model = PauliModel::new(PauliMode::RhoOnly { phi: 0.0, z: 0.1 });
    let mut sup = 0.0f64;
    for t_f in [1.0, 10.0, 50.0] {
        let geo = build_pulse(&model, Protocol::Geometric, -10.0, 10.0, t_f, 20_001, 0).unwrap();
        let ana = analytic_rho_pulse(0.1, -10.0, 10.0, t_f, 20_001).unwrap();
        sup = sup.max(sup_diff(&geo, &ana, 20_000));
    }
    let g = series(fig2, "geometric_error");
    let a = series(fig2, "analytic_two_level_error");
    let curve = g.iter().zip(&a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let defect = fig2.scalars["geometric_max_speed_defect"];
    let pass = sup < 1e-4 * 10.0 && curve < 1e-4;
    (outcome(pass, format!("pulse sup-norm {sup:.2e} (limit 1e-3), error-curve sup difference {curve:.2e}")), defect)
}

fn crit4(fig2: &ExperimentReport) -> Outcome {
    let t_f = &fig2.axes[0].values;
    let lin = series(fig2, "linear_error");
    let geo = series(fig2, "geometric_error");
    // first local minimum of the linear error, if it oscillates at all
    let node = (1..lin.len() - 1).find(|&k| lin[k] < lin[k - 1] && lin[k] <= lin[k + 1]).unwrap_or(0);
    let bad: Vec<f64> = (node..lin.len()).filter(|&k| geo[k] > lin[k]).map(|k| t_f[k]).collect();
    let ratio = (node..lin.len()).map(|k| geo[k] / lin[k]).fold(0.0, f64::max);
    outcome(
        bad.is_empty() && t_f[0] <= 1.0 && *t_f.last().unwrap() >= 50.0,
        format!(
            "{} t_f points from {} ns, geometric ≤ linear everywhere checked (max ratio {ratio:.3e}){}",
            lin.len() - node,
            t_f[node],
            if bad.is_empty() { String::new() } else { format!("; violated at {bad:?}") }
        ),
    )
}

fn crit5() -> (Outcome, f64) {
    let cfg = ExperimentConfig::preset(ExperimentKind::Fig5Grids);
    let r = run_transfer_grid(&cfg).unwrap();
    let geo = series(&r, "geometric_fidelity");
    let lin = series(&r, "linear_fidelity");
    let min_geo = geo.iter().copied().fold(f64::INFINITY, f64::min);
    let min_lin = lin.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = r.cells() == 64 && r.failed.is_empty() && min_geo >= 0.985 && min_lin < min_geo;
    (
        outcome(
            pass,
            format!("geometric min fidelity {min_geo:.6} over {} cells (linear min {min_lin:.4})", r.cells()),
        ),
        r.scalars["geometric_max_speed_defect"],
    )
}

fn crit6() -> (Outcome, f64) {
    let mut cfg = ExperimentConfig::preset(ExperimentKind::Fig3_6x6);
    cfg.axes = vec![AxisSpec::list("t_f", vec![150.0])];
    let r = run_fig3(&cfg).unwrap();
    let err = series(&r, "geometric_error")[0];
    let lin = series(&r, "linear_error")[0];
    (
        outcome(
            err <= 5e-4,
            format!("geometric transfer error at 150 ns = {err:.3e} (linear {lin:.3}), two-level metric pulse"),
        ),
        r.scalars["geometric_max_speed_defect"],
    )
}

fn crit7(defects: &[(&str, f64)]) -> Outcome {
    let worst = defects.iter().map(|d| d.1).fold(0.0, f64::max);
    let list: Vec<String> = defects.iter().map(|(n, d)| format!("{n} {d:.1e}")).collect();
    outcome(worst < 1e-3, format!("max relative deviation of g ε̇² from δ²: {}", list.join(", ")))
}

fn crit8() -> Outcome {
    let mut r = rng(8);
    let (mut trace, mut herm, mut min_eig, mut diff) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    let opts = LindbladOptions { steps: 4000, ..LindbladOptions::default() };
    for k in 0..10 {
        let (model, layout, eps0, eps_f): (Box<dyn ParametricHamiltonian>, _, _, _) = if k < 8 {
            let p = DqdParams {
                omega: r.gen_range(0.5..5.0),
                de_z: r.gen_range(0.5..5.0),
                ..DqdParams::three_level_default()
            };
            (Box::new(Dqd3::new(p).unwrap()), ChargeLayout::dqd3(), 200.0, 0.0)
        } else {
            (Box::new(Dqd6::new(DqdParams::six_level_default()).unwrap()), ChargeLayout::dqd6(), 150.0, 10.0)
        };
        let t2 = 10f64.powf(r.gen_range(0.0..3.0));
        let t_f = r.gen_range(2.0..20.0);
        let pulse = if k % 2 == 0 {
            build_pulse(model.as_ref(), Protocol::Geometric, eps0, eps_f, t_f, 4001, 0).unwrap()
        } else {
            linear_pulse(eps0, eps_f, t_f).unwrap()
        };
        let mut finals = Vec::new();
        for v in [DephasingVariant::A, DephasingVariant::B] {
            let jumps = vec![dephasing_jump(t2, &layout, v).unwrap()];
            let (_, run) = lindblad_transfer_fidelity(model.as_ref(), &pulse, &jumps, 0, &opts).unwrap();
            trace = trace.max(run.trace_drift);
            herm = herm.max(run.hermiticity_drift);
            min_eig = min_eig.min(run.min_eigenvalue);
            finals.push(run.rho.entries);
        }
        diff = diff.max(finals[0].max_abs_diff(&finals[1]));
    }
    let pass = trace < 1e-9 && herm < 1e-9 && min_eig >= -1e-8 && diff < 1e-9;
    outcome(
        pass,
        format!("trace drift {trace:.1e}, hermiticity drift {herm:.1e}, min eigenvalue {min_eig:.1e}, variant A vs B {diff:.1e} over 20 runs"),
    )
}

fn random_matrix(r: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let v = (0..d * d).map(|_| c64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    ComplexMatrix::from_vec(d, d, v).unwrap()
}

fn crit9() -> Outcome {
    let mut r = rng(9);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let d = [2, 3][k % 2];
        let h = random_matrix(&mut r, d).hermitian_part();
        let jumps: Vec<JumpOperator> =
            (0..1 + k % 3).map(|i| JumpOperator::new(random_matrix(&mut r, d), format!("L{i}")).unwrap()).collect();
        let a = random_matrix(&mut r, d);
        let rho = a.matmul(&a.dagger()).unwrap();
        let rho = rho.scale_real(1.0 / rho.trace().re);
        let lv = lindblad_superoperator(&h, &jumps).unwrap().mul_vec(&vec_row(&rho));
        let direct = vec_row(&lindblad_rhs(&h, &jumps, &rho).unwrap());
        worst = worst.max(lv.iter().zip(&direct).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
    }
    outcome(worst < 1e-12, format!("max |𝓛 vec ρ - vec(𝓛ρ)| = {worst:.2e} over 100 triples"))
}

fn crit10() -> Outcome {
    let cfg = ExperimentConfig::preset(ExperimentKind::Fig7OptimalTime).effective();
    let (grid, summary) = run_optimal_time(&cfg).unwrap();
    let t2 = &summary.axes[0].values;
    let lin_t = series(&summary, "linear_t_f_opt");
    let geo_t = series(&summary, "geometric_t_f_opt");
    let lin_f = series(&summary, "linear_fidelity_max");
    let geo_f = series(&summary, "geometric_fidelity_max");
    let t_max = grid.axes[1].values.iter().copied().fold(0.0, f64::max);
    let pass = grid.failed.is_empty()
        && t2.len() >= 2
        && t2[0] == 1.0
        && *t2.last().unwrap() == 1000.0
        && lin_t.iter().all(|t| *t == 50.0)
        && geo_t.iter().all(|t| *t < 10.0)
        && geo_f.iter().zip(&lin_f).all(|(g, l)| g >= l)
        && t_max <= 50.0;
    let rows: Vec<String> = (0..t2.len())
        .map(|i| format!("T2={}: geo t*={} F={:.4}, lin t*={} F={:.4}", t2[i], geo_t[i], geo_f[i], lin_t[i], lin_f[i]))
        .collect();
    outcome(pass, rows.join("; "))
}

fn crit11() -> Outcome {
    let cfg = ExperimentConfig::preset(ExperimentKind::Fig6Quasistatic);
    let r = run_quasistatic(&cfg).unwrap();
    let d = series(&r, "geometric_delta_f");
    let offsets = &r.axes[0].values;
    let max = r.scalars["geometric_max_abs_delta_f"];
    let pass = max < 5e-4 && offsets.len() >= 3 && offsets[0] == -5.0 && *offsets.last().unwrap() == 5.0;
    outcome(
        pass,
        format!(
            "max |ΔF| = {max:.3e} over {} offsets (F0 = {:.5}, ΔF(-5) = {:.2e}, ΔF(+5) = {:.2e})",
            d.len(),
            r.scalars["geometric_f0"],
            d[0],
            d[d.len() - 1]
        ),
    )
}

fn crit12() -> Outcome {
    let n = 20_001;
    let omega = 10.0;
    // J = 0: closed form against the generic solver on the effective model
    let sw = Sw2::new(omega, 0.0).unwrap();
    let mut lz = 0.0f64;
    for (a, b) in [(20.0, -20.0), (100.0, -100.0)] {
        let closed = sw_closed_form_pulse(omega, 0.0, a, b, 1.0, n).unwrap();
        let generic = build_pulse(&sw, Protocol::Historical, a, b, 1.0, n, 0).unwrap();
        lz = lz.max(sup_diff(&closed, &generic, 20_000) / (a - b).abs());
    }
    // finite J: closed form against the three-level solver near the resonance
    let u = 100.0;
    let mut dev = Vec::new();
    for de_z in [0.5, 1.0, 2.0] {
        let closed = sw_closed_form_pulse(omega, de_z, 2.0 * omega, -2.0 * omega, 1.0, n).unwrap().shifted(u).unwrap();
        let m = Dqd3::new(DqdParams { u_tilde: u, omega, de_z, ..DqdParams::three_level_default() }).unwrap();
        let generic = build_pulse(&m, Protocol::Historical, u + 2.0 * omega, u - 2.0 * omega, 1.0, n, 0).unwrap();
        dev.push(sup_diff(&closed, &generic, 20_000) / (4.0 * omega));
    }
    let increasing = dev.windows(2).all(|w| w[1] > w[0]);
    outcome(
        lz < 1e-3 && increasing,
        format!(
            "J=0 relative sup-norm {lz:.2e}; three-level deviation at ΔE_Z = 0.5, 1, 2: {:.4}, {:.4}, {:.4}",
            dev[0], dev[1], dev[2]
        ),
    )
}

fn crit13(fig2: &ExperimentReport) -> Outcome {
    let mut cfg = ExperimentConfig::preset(ExperimentKind::Fig2TwoLevel);
    cfg.experiment.threads = 2;
    let again = run_fig2(&cfg.clone().effective()).unwrap();
    cfg.experiment.threads = 1;
    let single = run_experiment(&cfg).unwrap().remove(0);
    let same_fig2 = csv_string(fig2).unwrap() == csv_string(&again).unwrap()
        && csv_string(fig2).unwrap() == csv_string(&single).unwrap();
    let mut q = ExperimentConfig::preset(ExperimentKind::Fig6Quasistatic);
    q.experiment.seed = 42;
    q.noise = Some(QuasistaticSpec::from_source(
        OffsetSource::Gaussian { sigma: 2.0, n_samples: 8 },
        42,
        PerturbationMode::Boundary,
    ));
    q.solver.steps = 4000;
    let a = run_experiment(&q).unwrap().remove(0);
    let b = run_experiment(&q).unwrap().remove(0);
    let same_noise =
        csv_string(&a).unwrap() == csv_string(&b).unwrap() && json_string(&a).unwrap() == json_string(&b).unwrap();
    outcome(same_fig2 && same_noise, format!("fig2 CSV identical across runs and thread counts: {same_fig2}; seeded noise CSV/JSON identical: {same_noise}"))
}

fn main() {
    // keep `cargo test -- --list` and filters from running the whole suite
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let mut suite = Suite { failures: 0 };
    let sec = Duration::from_secs;
    suite.run(1, "Bloch metric exactness", Some(sec(1)), crit1);
    suite.run(2, "metric oracle agreement", Some(sec(10)), crit2);

    let mut fig2 = None;
    let mut fig2_defect = f64::NAN;
    suite.run(3, "analytic geodesic equivalence", Some(sec(30)), || {
        let r = run_fig2(&ExperimentConfig::preset(ExperimentKind::Fig2TwoLevel)).expect("two-level sweep runs");
        let (o, d) = crit3(&r);
        fig2_defect = d;
        fig2 = Some(r);
        o
    });
    let fig2 = fig2.expect("two-level sweep available");
    suite.run(4, "two-level advantage", Some(sec(60)), || crit4(&fig2));
    let mut fig5_defect = f64::NAN;
    suite.run(5, "three-level 20 ns bound", Some(sec(120)), || {
        let (o, d) = crit5();
        fig5_defect = d;
        o
    });
    let mut fig3_defect = f64::NAN;
    suite.run(6, "6x6 initialization", Some(sec(60)), || {
        let (o, d) = crit6();
        fig3_defect = d;
        o
    });
    suite.run(7, "Beltrami conservation", None, || {
        crit7(&[("two-level", fig2_defect), ("three-level grid", fig5_defect), ("6x6", fig3_defect)])
    });
    suite.run(8, "Lindblad structure", Some(sec(60)), crit8);
    suite.run(9, "superoperator correctness", Some(sec(10)), crit9);
    suite.run(10, "optimal-time structure", Some(sec(300)), crit10);
    suite.run(11, "quasistatic robustness", Some(sec(60)), crit11);
    suite.run(12, "SW consistency", Some(sec(30)), crit12);
    suite.run(13, "determinism", None, || crit13(&fig2));
    if suite.failures > 0 {
        println!("{} criteria failed", suite.failures);
        std::process::exit(1);
    }
    println!("all 13 criteria passed");
}
