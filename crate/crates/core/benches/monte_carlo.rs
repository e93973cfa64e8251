use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use levy_ito::ito_integral::{isometry_check, Coefficient, SimpleProcess};
use levy_ito::malliavin::{chaos_isometry_check, Cell, StepKernel};
use levy_ito::mc::McSettings;
use levy_ito::{Execution, JumpSet, LevyMeasureModel};

const SAMPLES: u64 = 50_000;

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn isometry(c: &mut Criterion) {
    let model = Arc::new(LevyMeasureModel::atoms(&[(1.0, 1.0), (-1.0, 0.5)]).unwrap());
    let x = SimpleProcess::new(
        vec![-1.0, 0.0, 0.5, 1.5],
        vec![
            Coefficient::Const(2.0),
            Coefficient::clamp_noise(-1.0, 0.0, 3.0).unwrap(),
            Coefficient::Product(vec![
                Coefficient::clamp_noise(-1.0, 0.0, 3.0).unwrap(),
                Coefficient::clamp_noise(0.0, 0.5, 3.0).unwrap(),
            ]),
        ],
    )
    .unwrap();
    let mut group = c.benchmark_group("isometry");
    group.sample_size(10);
    for (label, exec) in modes() {
        let mc = McSettings::new(SAMPLES, 1).with_exec(exec);
        group.bench_with_input(BenchmarkId::from_parameter(label), &mc, |b, mc| {
            b.iter(|| isometry_check(&model, &x, 2.0, mc).unwrap())
        });
    }
    group.finish();
}

fn chaos(c: &mut Criterion) {
    let model = Arc::new(LevyMeasureModel::unit_atom());
    let cells: Vec<Cell> =
        (0..3).map(|i| Cell::new(i as f64 - 1.0, i as f64, JumpSet::Atoms(vec![1.0])).unwrap()).collect();
    let h = StepKernel::tensor(cells).unwrap();
    let mut group = c.benchmark_group("chaos_isometry_order3");
    group.sample_size(10);
    for (label, exec) in modes() {
        let mc = McSettings::new(SAMPLES, 2).with_exec(exec);
        group.bench_with_input(BenchmarkId::from_parameter(label), &mc, |b, mc| {
            b.iter(|| chaos_isometry_check(&model, &h, mc).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, isometry, chaos);
criterion_main!(benches);
