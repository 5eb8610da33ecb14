//! Experiment orchestration: TOML configs, parameter grids, and CSV / JSON /
//! SVG reports.

mod config;
mod emit;
mod experiments;
mod report;
mod svg;

pub use config::{
    AxisSpec, ExperimentConfig, ExperimentKind, ExperimentSection, Format, LindbladSection, MetricModel, MetricSection,
    OutputSection, PulseSection, SolverSection, Spacing, GRID_AXES,
};
pub use emit::{csv_string, emit, from_json, json_string, svg_string, write_csv};
pub use experiments::{
    cell_fidelity, cell_pulse, grid_cells, run_experiment, run_fig2, run_fig3, run_metric_scan, run_miscalibration,
    run_optimal_time, run_population_trace, run_pulse_export, run_quasistatic, run_transfer_grid, CellSpec,
    MAX_OPTIMAL_T_F,
};
pub use report::{report_schema, Axis, ExperimentReport, FailedCell, Metadata, PlotHint, Series, SCHEMA_VERSION};
