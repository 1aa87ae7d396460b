use codesign::codesign::{sweep, SweepOptions};
use codesign::discretize::discretize;
use codesign::exec::ExecMode;
use codesign::lqg::riccati_finite;
use codesign::model::{ContinuousPlant, DesignConfig, Horizon, NetworkTopology};
use codesign::netdp::solve_constrained;
use codesign::simulate::{simulate_closed_loop, LossModel, SimulationOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, ExecMode); 2] = [("parallel", ExecMode::Parallel), ("sequential", ExecMode::Sequential)];

fn monte_carlo(c: &mut Criterion) {
    let plant = ContinuousPlant::second_order(-1.0, 1.0, 1.0);
    let topo = NetworkTopology::line(4, 0.3, 10.0).unwrap();
    let dp = discretize(&plant, 0.1, 0.1, 20.0).unwrap();
    let gains = riccati_finite(&dp, dp.n_steps).unwrap();
    let policy = solve_constrained(&topo, topo.source(), 10, 5.0).unwrap();
    let mut group = c.benchmark_group("simulate_closed_loop");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let options = SimulationOptions {
                    exec,
                    ..SimulationOptions::new(256, 1)
                };
                let loss = LossModel::SlotLevel {
                    policy: &policy,
                    topology: &topo,
                };
                simulate_closed_loop(&plant, &dp, &gains, loss, options).unwrap()
            })
        });
    }
    group.finish();
}

fn design_sweep(c: &mut Criterion) {
    let plant = ContinuousPlant::second_order(-1.0, 1.0, 1.0);
    let topo = NetworkTopology::line(5, 0.3, 10.0).unwrap();
    let config = DesignConfig {
        horizon: Horizon::Infinite,
        h_grid_ms: Some((2..=40).map(|k| 10.0 * k as f64).collect()),
        ..DesignConfig::default()
    };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sweep(&plant, &topo, &config, SweepOptions { simulate: false, exec }).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, design_sweep);
criterion_main!(benches);
