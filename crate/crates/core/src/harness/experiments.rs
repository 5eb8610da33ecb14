use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind, MetricModel};
use super::report::{Axis, ExperimentReport, Metadata, PlotHint};
use crate::dynamics::{
    dephasing_jump, instantaneous_state, lindblad_transfer_fidelity, propagate_lindblad, propagate_schrodinger,
    pure_state_fidelity, transfer_probability, ChargeLayout, JumpOperator, LindbladOptions, SchrodingerOptions,
};
use crate::error::{Error, Result};
use crate::linalg::{eigensystem, inner};
use crate::metric::{historical_weight, qgt_spectral};
use crate::models::{truncate_two_level, AngularFactor, ModelKind, ModelSpec, ParametricHamiltonian, PauliMode};
use crate::noise::{miscalibration_run, quasistatic_run, RunSettings};
use crate::par::{par_map, with_threads};
use crate::pulse::{
    analytic_rho_pulse, analytic_two_level, build_pulse, linear_pulse, speed_defect, sw_closed_form_pulse, Protocol,
    PulseSchedule,
};

/// Pulses for a `t_f` sweep are synthesized once at this duration and
/// rescaled, which is exact for every protocol.
const REFERENCE_T_F: f64 = 1.0;

/// Longest operation time the optimal-time search accepts.
pub const MAX_OPTIMAL_T_F: f64 = 50.0;

fn metadata(cfg: &ExperimentConfig) -> Metadata {
    Metadata {
        generator: "geoquad".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: cfg.experiment.kind.name().into(),
        config_hash: cfg.hash(),
        config: cfg.to_json(),
        extra: BTreeMap::new(),
    }
}

fn factor(cfg: &ExperimentConfig) -> AngularFactor {
    cfg.experiment.angular_factor
}

/// Runs whatever the config's experiment kind asks for, on the configured
/// number of threads.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentReport>> {
    let cfg = cfg.clone().effective();
    cfg.validate()?;
    with_threads(cfg.experiment.threads, || {
        Ok(match cfg.experiment.kind {
            ExperimentKind::Fig2TwoLevel => vec![run_fig2(&cfg)?],
            ExperimentKind::Fig3_6x6 => vec![run_fig3(&cfg)?],
            ExperimentKind::Fig5Grids | ExperimentKind::Custom => vec![run_transfer_grid(&cfg)?],
            ExperimentKind::Fig6Quasistatic => vec![run_quasistatic(&cfg)?],
            ExperimentKind::Fig7OptimalTime => {
                let (grid, summary) = run_optimal_time(&cfg)?;
                vec![grid, summary]
            }
            ExperimentKind::Fig8Miscal => vec![run_miscalibration(&cfg)?],
            ExperimentKind::PopTrace => vec![run_population_trace(&cfg)?],
        })
    })
}

/// Inputs of one grid cell. Cells share nothing, so a grid is the same as
/// running each cell on its own.
#[derive(Debug, Clone)]
pub struct CellSpec {
    pub model: ModelSpec,
    pub eps0: f64,
    pub eps_f: f64,
    pub t_f: f64,
    pub t2: Option<f64>,
}

impl CellSpec {
    /// Everything that determines the pulse shape, `t_f` excluded.
    fn shape_key(&self) -> String {
        format!("{}|{:?}|{:?}", serde_json::to_string(&self.model).unwrap_or_default(), self.eps0, self.eps_f)
    }
}

fn apply_axis(cell: &mut CellSpec, name: &str, v: f64) -> Result<()> {
    match name {
        "omega" => cell.model.omega = Some(v),
        "de_z" => cell.model.de_z = Some(v),
        "de_x" => cell.model.de_x = Some(v),
        "u_tilde" => cell.model.u_tilde = Some(v),
        "e_z" => cell.model.e_z = Some(v),
        "z" => cell.model.z = Some(v),
        "eps0" => cell.eps0 = v,
        "eps_f" => cell.eps_f = v,
        "t_f" => cell.t_f = v,
        "t2" => cell.t2 = Some(v),
        other => return Err(Error::Config(format!("axis {other:?} is not a grid parameter"))),
    }
    Ok(())
}

/// Axes and row-major cells of the config's grid. A config without axes is a
/// single cell.
pub fn grid_cells(cfg: &ExperimentConfig) -> Result<(Vec<Axis>, Vec<CellSpec>)> {
    let axes: Vec<Axis> =
        cfg.axes.iter().map(|a| Ok(Axis { name: a.name.clone(), values: a.values()? })).collect::<Result<_>>()?;
    let base = CellSpec {
        model: cfg.model().clone(),
        eps0: cfg.pulse.eps0.unwrap(),
        eps_f: cfg.pulse.eps_f.unwrap(),
        t_f: cfg.pulse.t_f.unwrap(),
        t2: None,
    };
    let n: usize = axes.iter().map(|a| a.values.len()).product();
    let mut cells = Vec::with_capacity(n);
    for k in 0..n {
        let mut cell = base.clone();
        let mut rest = k;
        for a in axes.iter().rev() {
            apply_axis(&mut cell, &a.name, a.values[rest % a.values.len()])?;
            rest /= a.values.len();
        }
        cells.push(cell);
    }
    Ok((axes, cells))
}

/// The model a pulse is synthesized from.
fn pulse_model(
    cfg: &ExperimentConfig,
    model: Arc<dyn ParametricHamiltonian>,
    eps0: f64,
) -> Result<Arc<dyn ParametricHamiltonian>> {
    match cfg.pulse.metric_model.unwrap_or_default() {
        MetricModel::Full => Ok(model),
        MetricModel::Truncated => truncate_two_level(model, &[eps0]),
    }
}

/// Builds the pulse of `protocol` for one cell at duration `t_f`.
pub fn cell_pulse(cfg: &ExperimentConfig, cell: &CellSpec, protocol: Protocol, t_f: f64) -> Result<PulseSchedule> {
    let samples = cfg.solver.samples;
    let level = cfg.pulse.level;
    match protocol {
        Protocol::Linear => linear_pulse(cell.eps0, cell.eps_f, t_f),
        Protocol::Geometric | Protocol::Historical => {
            let m = pulse_model(cfg, cell.model.build(factor(cfg))?, cell.eps0)?;
            build_pulse(m.as_ref(), protocol, cell.eps0, cell.eps_f, t_f, samples, level)
        }
        Protocol::AnalyticTwoLevel => match cell.model.pauli_mode()? {
            PauliMode::RhoOnly { z, .. } if cell.model.kind == ModelKind::Pauli => {
                analytic_rho_pulse(z, cell.eps0, cell.eps_f, t_f, samples)
            }
            PauliMode::ThetaOnly { .. } if cell.model.kind == ModelKind::Pauli => {
                analytic_two_level(cell.eps0, cell.eps_f, t_f)
            }
            _ => Err(Error::Config("analytic_two_level needs a pauli rho_only or theta_only model".into())),
        },
        Protocol::SwClosedForm => {
            let p = cell.model.dqd_params();
            match cell.model.kind {
                ModelKind::Sw2 => sw_closed_form_pulse(p.omega, p.de_z, cell.eps0, cell.eps_f, t_f, samples),
                // the closed form measures ε from the S(2,0)-S(1,1) resonance at Ũ
                ModelKind::Dqd3 => {
                    sw_closed_form_pulse(p.omega, p.de_z, cell.eps0 - p.u_tilde, cell.eps_f - p.u_tilde, t_f, samples)?
                        .shifted(p.u_tilde)
                }
                _ => Err(Error::Config("sw_closed_form needs a dqd3 or sw2 model".into())),
            }
        }
    }
}

fn jumps_for(cfg: &ExperimentConfig, dim: usize, t2: Option<f64>) -> Result<Vec<JumpOperator>> {
    match t2 {
        None => Ok(Vec::new()),
        Some(t2) => Ok(vec![dephasing_jump(t2, &ChargeLayout::for_dim(dim)?, cfg.lindblad.variant)?]),
    }
}

fn lindblad_options(cfg: &ExperimentConfig, record_every: usize) -> LindbladOptions {
    LindbladOptions {
        steps: cfg.solver.steps,
        method: cfg.solver.lindblad_method,
        record_every,
        ..LindbladOptions::default()
    }
}

/// Transfer fidelity of one cell: `|⟨ψ_target|ψ(t_f)⟩|²` without dephasing,
/// the Uhlmann fidelity against the target eigenstate with it.
pub fn cell_fidelity(cfg: &ExperimentConfig, cell: &CellSpec, pulse: &PulseSchedule) -> Result<f64> {
    let model = cell.model.build(factor(cfg))?;
    let level = cfg.pulse.level;
    match cell.t2 {
        None => transfer_probability(model.as_ref(), pulse, level, cfg.solver.steps),
        Some(_) => {
            let jumps = jumps_for(cfg, model.dim(), cell.t2)?;
            let (f, _) = lindblad_transfer_fidelity(model.as_ref(), pulse, &jumps, level, &lindblad_options(cfg, 0))?;
            Ok(f)
        }
    }
}

fn err_string(e: &Error) -> String {
    e.to_string()
}

/// Fidelity, error `1 - F` and adiabaticity δ per cell and protocol.
pub fn run_transfer_grid(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let (axes, cells) = grid_cells(cfg)?;
    let mut report = ExperimentReport::new(cfg.name(), axes, metadata(cfg));
    // one reference pulse per distinct shape
    let mut shapes: Vec<(String, usize)> = Vec::new();
    let mut shape_of = Vec::with_capacity(cells.len());
    for (k, c) in cells.iter().enumerate() {
        let key = c.shape_key();
        let idx = match shapes.iter().position(|(s, _)| *s == key) {
            Some(i) => i,
            None => {
                shapes.push((key, k));
                shapes.len() - 1
            }
        };
        shape_of.push(idx);
    }
    let mut worst_defect: BTreeMap<Protocol, f64> = BTreeMap::new();
    for &protocol in &cfg.pulse.protocols {
        let refs: Vec<std::result::Result<PulseSchedule, String>> =
            par_map(&shapes, |(_, k)| cell_pulse(cfg, &cells[*k], protocol, REFERENCE_T_F).map_err(|e| err_string(&e)));
        if matches!(protocol, Protocol::Geometric | Protocol::Historical) {
            let defects: Vec<f64> = par_map(&shapes.iter().zip(&refs).collect::<Vec<_>>(), |((_, k), p)| {
                let Ok(p) = p else { return 0.0 };
                let cell = &cells[*k];
                cell.model
                    .build(factor(cfg))
                    .and_then(|m| pulse_model(cfg, m, cell.eps0))
                    .and_then(|m| speed_defect(m.as_ref(), p, cfg.pulse.level))
                    .unwrap_or(f64::NAN)
            });
            let worst = defects.iter().copied().fold(0.0, f64::max);
            worst_defect.insert(protocol, worst);
        }
        let idx: Vec<usize> = (0..cells.len()).collect();
        let out: Vec<(std::result::Result<f64, String>, std::result::Result<f64, String>)> = par_map(&idx, |&k| {
            let cell = &cells[k];
            let pulse = refs[shape_of[k]].clone().and_then(|p| p.rescaled(cell.t_f).map_err(|e| err_string(&e)));
            match pulse {
                Ok(p) => (cell_fidelity(cfg, cell, &p).map_err(|e| err_string(&e)), Ok(p.delta)),
                Err(e) => (Err(e.clone()), Err(e)),
            }
        });
        let (fid, delta): (Vec<_>, Vec<_>) = out.into_iter().unzip();
        let err = fid.iter().map(|f| f.as_ref().map(|f| 1.0 - f).map_err(Clone::clone)).collect();
        report.push_series(format!("{protocol}_fidelity"), fid);
        report.push_series(format!("{protocol}_error"), err);
        report.push_series(format!("{protocol}_delta"), delta);
    }
    for (p, d) in worst_defect {
        report.scalars.insert(format!("{p}_max_speed_defect"), d);
    }
    let errors: Vec<String> = cfg.pulse.protocols.iter().map(|p| format!("{p}_error")).collect();
    let log_x = cfg.axes.last().is_some_and(|a| a.spacing == super::config::Spacing::Log);
    report.plot = if report.axes.len() == 2 && !report.axes.iter().any(|a| a.name == "t2") {
        PlotHint::Heatmap { series: errors, log_color: true }
    } else {
        PlotHint::Line { series: errors, log_x, log_y: true }
    };
    Ok(report)
}

/// Transfer error against `t_f` on the two-level Pauli model.
pub fn run_fig2(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.model().kind != ModelKind::Pauli {
        return Err(Error::Config("fig2_two_level expects a pauli model".into()));
    }
    run_transfer_grid(cfg)
}

/// Transfer error against `t_f` on the 6×6 model.
pub fn run_fig3(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.model().kind != ModelKind::Dqd6 {
        return Err(Error::Config("fig3_6x6 expects a dqd6 model".into()));
    }
    run_transfer_grid(cfg)
}

/// For each T₂ and protocol, the `t_f` of largest Uhlmann fidelity. Returns
/// the full fidelity grid and the per-T₂ summary.
pub fn run_optimal_time(cfg: &ExperimentConfig) -> Result<(ExperimentReport, ExperimentReport)> {
    let names: Vec<&str> = cfg.axes.iter().map(|a| a.name.as_str()).collect();
    if names != ["t2", "t_f"] {
        return Err(Error::Config(format!("optimal-time search needs axes [t2, t_f], got {names:?}")));
    }
    let t_f = cfg.axes[1].values()?;
    if t_f.iter().any(|t| !(*t > 0.0 && *t <= MAX_OPTIMAL_T_F)) {
        return Err(Error::Config(format!("t_f grid must lie within (0, {MAX_OPTIMAL_T_F}]")));
    }
    let grid = run_transfer_grid(cfg)?;
    let t2 = grid.axes[0].clone();
    let nt = t_f.len();
    let mut summary = ExperimentReport::new(format!("{}_summary", cfg.name()), vec![t2.clone()], metadata(cfg));
    let mut plot = Vec::new();
    for p in &cfg.pulse.protocols {
        let f = grid.series(&format!("{p}_fidelity")).expect("grid has fidelity series");
        let mut best_t = Vec::new();
        let mut best_f = Vec::new();
        for i in 0..t2.values.len() {
            let row = &f.values[i * nt..(i + 1) * nt];
            // first maximum on ties, failed cells ignored
            let best = row.iter().enumerate().filter_map(|(k, v)| v.map(|v| (k, v))).fold(
                None,
                |acc: Option<(usize, f64)>, (k, v)| match acc {
                    Some((_, bv)) if bv >= v => acc,
                    _ => Some((k, v)),
                },
            );
            match best {
                Some((k, v)) => {
                    best_t.push(Ok(t_f[k]));
                    best_f.push(Ok(v));
                }
                None => {
                    best_t.push(Err("every t_f failed".to_string()));
                    best_f.push(Err("every t_f failed".to_string()));
                }
            }
        }
        summary.push_series(format!("{p}_t_f_opt"), best_t);
        summary.push_series(format!("{p}_fidelity_max"), best_f);
        plot.push(format!("{p}_t_f_opt"));
    }
    summary.plot = PlotHint::Line { series: plot, log_x: true, log_y: false };
    let mut grid = grid;
    grid.plot = PlotHint::Line {
        series: cfg.pulse.protocols.iter().map(|p| format!("{p}_fidelity")).collect(),
        log_x: false,
        log_y: false,
    };
    Ok((grid, summary))
}

fn load_pulse_file(path: &Path) -> Result<PulseSchedule> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let (mut t, mut e) = (Vec::new(), Vec::new());
    for row in rdr.records() {
        let row = row.map_err(|err| Error::Config(format!("{}: {err}", path.display())))?;
        let num = |i: usize| -> Result<f64> {
            row.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("{}: bad row {:?}", path.display(), row)))
        };
        t.push(num(0)?);
        e.push(num(1)?);
    }
    PulseSchedule::from_points(t, e, Protocol::Linear)
        .map_err(|err| Error::Config(format!("{}: {err}", path.display())))
}

/// Pulses traced by `evolve`: the configured file, or one per protocol.
fn traced_pulses(cfg: &ExperimentConfig) -> Result<Vec<(String, PulseSchedule)>> {
    if let Some(path) = &cfg.pulse.file {
        return Ok(vec![("file".into(), load_pulse_file(path)?)]);
    }
    let (_, cells) = grid_cells(&ExperimentConfig { axes: Vec::new(), ..cfg.clone() })?;
    cfg.pulse
        .protocols
        .iter()
        .map(|&p| Ok((p.to_string(), cell_pulse(cfg, &cells[0], p, cfg.pulse.t_f.unwrap())?)))
        .collect()
}

/// Populations and fidelity against the instantaneous eigenstate along the
/// pulse, for each protocol: a noiseless run plus one Lindblad run per T₂.
pub fn run_population_trace(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let model = cfg.model().build(factor(cfg))?;
    let level = cfg.pulse.level;
    let steps = cfg.solver.steps;
    let every = (steps / (cfg.solver.record_points - 1)).max(1);
    let labels = model.basis_labels();
    let t2_list: Vec<f64> = match cfg.axes.iter().find(|a| a.name == "t2") {
        Some(a) => a.values()?,
        None => cfg.lindblad.t2.clone(),
    };
    let pulses = traced_pulses(cfg)?;
    let mut report: Option<ExperimentReport> = None;
    let mut plot = Vec::new();
    for (name, pulse) in &pulses {
        let psi0 = instantaneous_state(model.as_ref(), pulse.eps(0.0), level)?;
        let clean =
            propagate_schrodinger(model.as_ref(), pulse, &psi0, &SchrodingerOptions { steps, record_every: every })?;
        let r = report.get_or_insert_with(|| {
            ExperimentReport::new(
                cfg.name(),
                vec![Axis { name: "t".into(), values: clean.times.clone() }],
                metadata(cfg),
            )
        });
        if r.axes[0].values.len() != clean.times.len() {
            return Err(Error::ShapeMismatch("traced pulses differ in length".into()));
        }
        let targets: Vec<_> = clean
            .times
            .iter()
            .map(|&t| instantaneous_state(model.as_ref(), pulse.eps(t), level))
            .collect::<Result<_>>()?;
        for (i, label) in labels.iter().enumerate() {
            r.push_series(
                format!("{name}_noiseless_pop_{label}"),
                clean.states.iter().map(|s| Ok(s.populations()[i])).collect(),
            );
        }
        r.push_series(
            format!("{name}_noiseless_fidelity"),
            clean
                .states
                .iter()
                .zip(&targets)
                .map(|(s, g)| Ok(inner(&g.amplitudes, &s.amplitudes).norm_sqr()))
                .collect(),
        );
        plot.push(format!("{name}_noiseless_fidelity"));
        let runs: Vec<Result<_>> = par_map(&t2_list, |&t2| {
            let jumps = jumps_for(cfg, model.dim(), Some(t2))?;
            propagate_lindblad(model.as_ref(), pulse, &jumps, &psi0.to_density(), &lindblad_options(cfg, every))
        });
        for (&t2, run) in t2_list.iter().zip(runs) {
            let run = run?;
            for (i, label) in labels.iter().enumerate() {
                r.push_series(
                    format!("{name}_t2_{t2}_pop_{label}"),
                    run.states.iter().map(|s| Ok(s.populations()[i])).collect(),
                );
            }
            let f: Vec<_> = run
                .states
                .iter()
                .zip(&targets)
                .map(|(rho, g)| pure_state_fidelity(rho, g).map_err(|e| err_string(&e)))
                .collect();
            r.push_series(format!("{name}_t2_{t2}_fidelity"), f);
            plot.push(format!("{name}_t2_{t2}_fidelity"));
        }
    }
    let mut report = report.ok_or_else(|| Error::Config("no pulse to trace".into()))?;
    report.plot = PlotHint::Line { series: plot, log_x: false, log_y: false };
    Ok(report)
}

fn settings(cfg: &ExperimentConfig, protocol: Protocol) -> RunSettings {
    RunSettings {
        samples: cfg.solver.samples,
        steps: cfg.solver.steps,
        level: cfg.pulse.level,
        ..RunSettings::new(cfg.pulse.eps0.unwrap(), cfg.pulse.eps_f.unwrap(), cfg.pulse.t_f.unwrap(), protocol)
    }
}

/// Fidelity change under quasistatic detuning offsets, per protocol.
pub fn run_quasistatic(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let spec = cfg.noise.clone().unwrap_or_default();
    let model = cfg.model().build(factor(cfg))?;
    let offsets = spec.offsets()?;
    let mut report =
        ExperimentReport::new(cfg.name(), vec![Axis { name: "delta_eps".into(), values: offsets }], metadata(cfg));
    report.metadata.extra.insert("perturbation".into(), json!(spec.perturbation));
    let mut plot = Vec::new();
    for &p in &cfg.pulse.protocols {
        let q = quasistatic_run(model.as_ref(), &settings(cfg, p), &spec)?;
        report.push_series(format!("{p}_fidelity"), q.fidelities.iter().map(|v| Ok(*v)).collect());
        report.push_series(format!("{p}_delta_f"), q.delta_f.iter().map(|v| Ok(*v)).collect());
        report.scalars.insert(format!("{p}_f0"), q.f0);
        report.scalars.insert(format!("{p}_mean_delta_f"), q.mean_delta_f);
        report.scalars.insert(format!("{p}_std_delta_f"), q.std_delta_f);
        report.scalars.insert(format!("{p}_max_abs_delta_f"), q.max_abs_delta_f);
        plot.push(format!("{p}_delta_f"));
    }
    report.plot = PlotHint::Line { series: plot, log_x: false, log_y: false };
    Ok(report)
}

/// Fidelity change when the pulse assumes a wrong tunnel coupling, over
/// `t_f` and δΩ.
pub fn run_miscalibration(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let spec = cfg.miscal.clone().ok_or_else(|| Error::Config("miscalibration needs a [miscal] section".into()))?;
    let t_f = match cfg.axes.iter().find(|a| a.name == "t_f") {
        Some(a) => a.values()?,
        None => vec![cfg.pulse.t_f.unwrap()],
    };
    let axes = vec![
        Axis { name: "t_f".into(), values: t_f.clone() },
        Axis { name: "delta_omega".into(), values: spec.delta_omega.clone() },
    ];
    let mut report = ExperimentReport::new(cfg.name(), axes, metadata(cfg));
    report.metadata.extra.insert("omega_system".into(), json!(spec.omega_system));
    let mut plot = Vec::new();
    for &p in &cfg.pulse.protocols {
        let m = miscalibration_run(cfg.model(), factor(cfg), &settings(cfg, p), &spec, &t_f)?;
        report.push_series(format!("{p}_fidelity"), m.fidelity.iter().flatten().map(|v| Ok(*v)).collect());
        report.push_series(format!("{p}_deviation"), m.deviation.iter().flatten().map(|v| Ok(*v)).collect());
        plot.push(format!("{p}_deviation"));
    }
    report.plot = PlotHint::Line { series: plot, log_x: false, log_y: false };
    Ok(report)
}

/// Quantum metric, Berry curvature and spectrum over the configured axes,
/// which must be named after model parameters. Unswept parameters come from
/// `[metric] point`. Single-parameter models default to a sweep between the
/// pulse boundaries.
pub fn run_metric_scan(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let cfg = cfg.clone().effective();
    let model = cfg.model().build(factor(&cfg))?;
    let names = model.param_names();
    let n = names.len();
    let mut axes: Vec<Axis> =
        cfg.axes.iter().map(|a| Ok(Axis { name: a.name.clone(), values: a.values()? })).collect::<Result<_>>()?;
    if axes.is_empty() && n == 1 {
        let (a, b) = (cfg.pulse.eps0.unwrap(), cfg.pulse.eps_f.unwrap());
        let (lo, hi) = (a.min(b), a.max(b));
        axes.push(Axis {
            name: names[0].clone(),
            values: (0..=400).map(|k| lo + (hi - lo) * k as f64 / 400.0).collect(),
        });
    }
    let mut slot = Vec::new();
    for a in &axes {
        let i = names
            .iter()
            .position(|p| *p == a.name)
            .ok_or_else(|| Error::Config(format!("axis {:?} is not a model parameter (have {names:?})", a.name)))?;
        slot.push(i);
    }
    let base = cfg.metric.point.clone().unwrap_or_else(|| vec![0.0; n]);
    if base.len() != n {
        return Err(Error::Config(format!("metric.point needs {n} values")));
    }
    let level = cfg.metric.level;
    let mut report = ExperimentReport::new(format!("{}_metric", cfg.name()), axes.clone(), metadata(&cfg));
    let points: Vec<Vec<f64>> = (0..report.cells())
        .map(|k| {
            let mut x = base.clone();
            for ((&s, &i), a) in slot.iter().zip(&report.unravel(k)).zip(&axes) {
                x[s] = a.values[i];
            }
            x
        })
        .collect();
    let tensors: Vec<Result<_>> = par_map(&points, |x| qgt_spectral(model.as_ref(), x, level));
    let spectra: Vec<Result<_>> = par_map(&points, |x| model.h_at(x).and_then(|h| eigensystem(&h)));
    let pick = |f: &dyn Fn(&crate::metric::GeoTensor) -> f64| -> Vec<std::result::Result<f64, String>> {
        tensors.iter().map(|t| t.as_ref().map(f).map_err(err_string)).collect()
    };
    for a in 0..n {
        for b in a..n {
            report.push_series(format!("g_{}_{}", names[a], names[b]), pick(&|t| t.g[a][b]));
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            report.push_series(format!("berry_{}_{}", names[a], names[b]), pick(&|t| t.berry[a][b]));
        }
    }
    if n == 1 {
        let hw: Vec<_> =
            par_map(&points, |x| historical_weight(model.as_ref(), x[0], level).map_err(|e| err_string(&e)));
        report.push_series("historical_weight", hw);
    }
    for k in 0..model.dim() {
        report.push_series(
            format!("energy_{k}"),
            spectra.iter().map(|s| s.as_ref().map(|s| s.values[k]).map_err(err_string)).collect(),
        );
    }
    let g0 = format!("g_{}_{}", names[0], names[0]);
    report.plot = if axes.len() == 2 {
        PlotHint::Heatmap { series: vec![g0], log_color: true }
    } else {
        PlotHint::Line { series: vec![g0], log_x: false, log_y: true }
    };
    Ok(report)
}

/// Samples every configured pulse on a uniform time grid.
pub fn run_pulse_export(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let cfg = cfg.clone().effective();
    cfg.validate()?;
    let pulses = traced_pulses(&cfg)?;
    let t_f = pulses.iter().map(|(_, p)| p.t_f).fold(0.0, f64::max);
    let m = cfg.solver.record_points;
    let times: Vec<f64> = (0..m).map(|k| t_f * k as f64 / (m - 1) as f64).collect();
    let mut report = ExperimentReport::new(
        format!("{}_pulses", cfg.name()),
        vec![Axis { name: "t".into(), values: times.clone() }],
        metadata(&cfg),
    );
    let (_, cells) = grid_cells(&ExperimentConfig { axes: Vec::new(), ..cfg.clone() })?;
    let mut plot = Vec::new();
    for (name, p) in &pulses {
        report.push_series(format!("{name}_eps"), times.iter().map(|&t| Ok(p.eps(t))).collect());
        report.push_series(format!("{name}_rate"), times.iter().map(|&t| Ok(p.rate(t))).collect());
        report.scalars.insert(format!("{name}_delta"), p.delta);
        if matches!(p.protocol, Protocol::Geometric | Protocol::Historical) && cfg.pulse.file.is_none() {
            let model = pulse_model(&cfg, cells[0].model.build(factor(&cfg))?, cells[0].eps0)?;
            report.scalars.insert(format!("{name}_speed_defect"), speed_defect(model.as_ref(), p, cfg.pulse.level)?);
        }
        plot.push(format!("{name}_eps"));
    }
    report.plot = PlotHint::Line { series: plot, log_x: false, log_y: false };
    Ok(report)
}
