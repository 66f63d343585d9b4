use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use ltmle_core::families::{FamilySpec, ParameterSpace};
use ltmle_core::harness::{map_trials, run_coverage, Estimator, Execution, ExperimentConfig};
use ltmle_core::mle::fit_mle;
use ltmle_core::truncated::{BetaChoice, BoundCase};

fn pareto(trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        family: FamilySpec::ParetoShape {
            x_min: 1.0,
            space: ParameterSpace::new(1.0, 2.0).unwrap(),
        },
        theta_star: 1.5,
        n: 500,
        trials,
        delta: 0.05,
        estimator: Estimator::Truncated,
        beta: BetaChoice::Auto,
        case: Some(BoundCase::ConstantC),
        master_seed: 1,
        contamination: None,
    }
}

// One worker runs the sequential path; without the `parallel` feature
// every variant does.
fn executions() -> Vec<(&'static str, Execution)> {
    vec![
        ("sequential", Execution::sequential()),
        ("parallel", Execution::default()),
    ]
}

fn bench_coverage(c: &mut Criterion) {
    let mut group = c.benchmark_group("coverage_run");
    group.sample_size(10);
    for trials in [200, 1000] {
        let cfg = pareto(trials);
        group.throughput(Throughput::Elements(trials as u64));
        for (name, exec) in executions() {
            group.bench_with_input(BenchmarkId::new(name, trials), &cfg, |b, cfg| {
                b.iter(|| run_coverage(cfg, exec).unwrap());
            });
        }
    }
    group.finish();
}

fn bench_mle_trials(c: &mut Criterion) {
    let spec = FamilySpec::WeibullScale {
        shape: 2,
        space: ParameterSpace::new(0.3, 4.0).unwrap(),
    };
    let model = spec.build().unwrap();
    let trials = 2000;
    let mut group = c.benchmark_group("mle_trials");
    group.throughput(Throughput::Elements(trials as u64));
    for (name, exec) in executions() {
        group.bench_function(name, |b| {
            b.iter(|| {
                map_trials(trials, 9, exec, |_, seed| {
                    let x = model.sample(1.2, 100, seed).unwrap();
                    fit_mle(model.as_ref(), &x).unwrap().theta_hat
                })
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_coverage, bench_mle_trials);
criterion_main!(benches);
