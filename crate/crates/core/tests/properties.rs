use std::sync::Arc;

use levy_ito::combinatorics::{
    cumulants_of_linear_functional, moment_from_all_partitions, moment_from_cumulants, CumulantVector,
};
use levy_ito::ito_integral::{Coefficient, SimpleProcess};
use levy_ito::mc::McSettings;
use levy_ito::{sample_prm, Execution, IntervalSet, LevyMeasureModel, StepFunction};
use proptest::prelude::*;

fn atoms() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((prop_oneof![-3.0..-0.1f64, 0.1..3.0f64], 0.05..2.0f64), 1..4)
}

fn step_function() -> impl Strategy<Value = StepFunction> {
    prop::collection::vec((0.1..1.0f64, -2.0..2.0f64), 1..4).prop_map(|pieces| {
        let mut lo = -1.0;
        let raw: Vec<(f64, f64, f64)> = pieces
            .into_iter()
            .map(|(len, v)| {
                let piece = (lo, lo + len, v);
                lo += len;
                piece
            })
            .collect();
        StepFunction::new(&raw).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn no_singleton_and_full_partition_sums_agree(
        k2 in 0.0..2.0f64,
        higher in prop::collection::vec(-2.0..2.0f64, 6),
        m in 2usize..=8,
    ) {
        let values = (2..=8).zip(std::iter::once(k2).chain(higher)).collect();
        let kappa = CumulantVector::new(values).unwrap();
        let pruned = moment_from_cumulants(&kappa, m).unwrap();
        let full = moment_from_all_partitions(0.0, &kappa, m).unwrap();
        prop_assert!((pruned - full).abs() <= 1e-12 * pruned.abs().max(1.0));
    }

    #[test]
    fn cumulants_scale_homogeneously(pairs in atoms(), phi in step_function(), c in -3.0..3.0f64) {
        let m = LevyMeasureModel::atoms(&pairs).unwrap();
        let base = cumulants_of_linear_functional(&m, &phi, 6).unwrap();
        let scaled = cumulants_of_linear_functional(&m, &phi.scaled(c), 6).unwrap();
        for n in 2..=6 {
            let expected = c.powi(n as i32) * base.get(n).unwrap();
            prop_assert!((scaled.get(n).unwrap() - expected).abs() <= 1e-12 * expected.abs().max(1e-300));
        }
    }

    #[test]
    fn interpolation_holds_on_random_atoms(pairs in atoms()) {
        let m = LevyMeasureModel::atoms(&pairs).unwrap();
        for row in m.interpolation_check(6).unwrap() {
            prop_assert!(row.pass, "{:?}", row);
        }
    }

    #[test]
    fn noise_is_additive_on_disjoint_sets(seed in any::<u64>(), cut in -0.9..0.9f64) {
        let m = Arc::new(LevyMeasureModel::atoms(&[(1.0, 1.0), (-2.0, 0.5)]).unwrap());
        let r = sample_prm(&m, 1.0, seed);
        let whole = r.eval_l_set(&IntervalSet::interval(-1.0, 1.0).unwrap()).unwrap();
        let left = r.eval_l_set(&IntervalSet::interval(-1.0, cut).unwrap()).unwrap();
        let right = r.eval_l_set(&IntervalSet::interval(cut, 1.0).unwrap()).unwrap();
        prop_assert!((whole - left - right).abs() <= 1e-12);
    }

    #[test]
    fn integral_is_linear_in_the_integrand(seed in any::<u64>(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let m = Arc::new(LevyMeasureModel::unit_atom());
        let x = SimpleProcess::new(vec![0.0, 1.0], vec![Coefficient::clamp_noise(-1.0, 0.0, 3.0).unwrap()]).unwrap();
        let y = SimpleProcess::new(vec![-0.5, 0.5, 1.5], vec![Coefficient::Const(1.0), Coefficient::Const(-2.0)]).unwrap();
        let combo = SimpleProcess::linear_combination(a, &x, b, &y);
        let r = sample_prm(&m, 2.0, seed);
        let lhs = combo.eval_i_k(&r, 2.0).unwrap();
        let rhs = a * x.eval_i_k(&r, 2.0).unwrap() + b * y.eval_i_k(&r, 2.0).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }
}

#[test]
fn scheduling_does_not_change_results() {
    let m = Arc::new(LevyMeasureModel::atoms(&[(1.0, 1.0), (-1.0, 0.5)]).unwrap());
    let set = IntervalSet::interval(-0.5, 1.5).unwrap();
    let stat = |exec| {
        McSettings::new(20_001, 77).with_exec(exec).run(2, true, |seed, row| {
            let l = sample_prm(&m, 1.5, seed).eval_l_set(&set).unwrap();
            row[0] = l;
            row[1] = l * l;
        })
    };
    let (par, seq) = (stat(Execution::Parallel), stat(Execution::Sequential));
    assert_eq!(par.rows, seq.rows);
    for d in 0..2 {
        assert_eq!(par.dim(d).mean().to_bits(), seq.dim(d).mean().to_bits());
        assert_eq!(par.dim(d).std_error().to_bits(), seq.dim(d).std_error().to_bits());
    }
}
