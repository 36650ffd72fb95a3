//! Sequential vs rayon execution of the three data-parallel workloads.
//! On a single-core machine both should be within noise of each other.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gsee_core::bounds::{default_grid, run_grid};
use gsee_core::gsee::{count_failures, GseeRunner};
use gsee_core::planner::{DepthRatioPolicy, PlanInputs};
use gsee_core::seed::STREAM_GSEE;
use gsee_core::sim::{Ancilla, Circuit, SpectrumSpec};
use gsee_core::Exec;

const MODES: [Exec; 2] = [Exec::Sequential, Exec::Parallel];

fn monte_carlo_runs(c: &mut Criterion) {
    let spec = SpectrumSpec::new(vec![-0.2, -0.05, 0.15], vec![0.5, 0.3, 0.2]).unwrap();
    let inputs = PlanInputs::new(0.1, 0.5, 0.1, 0.01, 0.0).with_policy(DepthRatioPolicy::Report);
    let mut g = c.benchmark_group("gsee_runs_x16");
    g.sample_size(10);
    for exec in MODES {
        let runner = GseeRunner::new(&spec, &inputs, Exec::Sequential).unwrap();
        g.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| count_failures(16, 1, STREAM_GSEE, exec, |s| Ok(runner.run(s)?.mu_hat > 0.0)).unwrap())
        });
    }
    g.finish();
}

fn bounds_grid(c: &mut Criterion) {
    let mut grid = default_grid();
    grid.etas = vec![0.5, 1.0];
    grid.deltas = vec![0.01];
    grid.stress = false;
    let mut g = c.benchmark_group("bounds_grid");
    g.sample_size(10);
    for exec in MODES {
        g.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| black_box(run_grid(&grid, exec).cases.len()))
        });
    }
    g.finish();
}

fn per_eigenstate_fft(c: &mut Criterion) {
    let k = 16;
    let phases: Vec<f64> = (0..k).map(|j| -0.4 + 0.05 * j as f64).collect();
    let spec = SpectrumSpec::new(phases, vec![1.0 / k as f64; k]).unwrap();
    let circuit = Circuit::new(14, Ancilla::Gaussian { sigma_bins: 4.0 }).unwrap();
    let mut g = c.benchmark_group("mixed_distribution_q14_16_states");
    for exec in MODES {
        g.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| black_box(circuit.mixed(&spec, exec).unwrap().mixed[0]))
        });
    }
    g.finish();
}

criterion_group!(benches, monte_carlo_runs, bounds_grid, per_eigenstate_fft);
criterion_main!(benches);
