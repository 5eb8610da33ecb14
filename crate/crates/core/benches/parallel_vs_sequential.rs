use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use geoquad::harness::{cell_fidelity, cell_pulse, grid_cells, CellSpec, ExperimentConfig};
use geoquad::par::{par_map, seq_map, with_threads};
use geoquad::pulse::Protocol;

const GRID: &str = r#"
[experiment]
kind = "custom"
name = "bench"

[model]
kind = "dqd3"

[pulse]
t_f = 10.0
protocols = ["geometric"]

[solver]
steps = 4000
samples = 4001

[[axes]]
name = "omega"
min = 0.5
max = 5.0
count = 4
spacing = "log"

[[axes]]
name = "de_z"
min = 0.5
max = 5.0
count = 4
spacing = "log"
"#;

fn cell(cfg: &ExperimentConfig, c: &CellSpec) -> f64 {
    let pulse = cell_pulse(cfg, c, Protocol::Geometric, c.t_f).unwrap();
    cell_fidelity(cfg, c, &pulse).unwrap()
}

fn bench(c: &mut Criterion) {
    let cfg = ExperimentConfig::from_toml(GRID).unwrap().effective();
    cfg.validate().unwrap();
    let (_, cells) = grid_cells(&cfg).unwrap();
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);

    let mut g = c.benchmark_group("transfer_grid_16_cells");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| seq_map(&cells, |x| cell(&cfg, x))));
    g.bench_with_input(BenchmarkId::new("parallel", threads), &threads, |b, &t| {
        b.iter(|| with_threads(t, || par_map(&cells, |x| cell(&cfg, x))))
    });
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
