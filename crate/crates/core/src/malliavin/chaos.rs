use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::malliavin::kernel::{eval_multiple_integral, Slice, StepKernel};
use crate::noise_sim::PointRealization;

/// `F = c0 + sum_n I_n(f_n)` with symmetric step kernels.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChaosFunctional {
    pub c0: f64,
    pub kernels: Vec<StepKernel>,
}

impl ChaosFunctional {
    pub fn constant(c0: f64) -> Self {
        Self { c0, kernels: Vec::new() }
    }

    pub fn single(kernel: StepKernel) -> Self {
        Self { c0: 0.0, kernels: vec![kernel] }
    }

    pub fn max_order(&self) -> usize {
        self.kernels.iter().map(StepKernel::order).max().unwrap_or(0)
    }

    pub fn reach(&self) -> f64 {
        self.kernels.iter().map(StepKernel::reach).fold(0.0, f64::max)
    }

    pub fn eval(&self, r: &PointRealization) -> Result<f64> {
        let mut total = self.c0;
        for k in &self.kernels {
            total += eval_multiple_integral(r, k)?;
        }
        Ok(total)
    }
}

/// `D_xi F = sum_n n I_{n-1}(f_n(., xi))`, as a chaos functional of one
/// order less. Kernels whose cells miss `xi` contribute nothing.
pub fn malliavin_derivative(f: &ChaosFunctional, x: f64, z: f64) -> ChaosFunctional {
    let mut out = ChaosFunctional::default();
    for k in &f.kernels {
        let Some(c) = k.cell_of(x, z) else { continue };
        let n = k.order() as f64;
        match k.slice(c) {
            Slice::Scalar(b) => out.c0 += n * b,
            Slice::Kernel(s) => {
                let scaled = scale_kernel(&s, n);
                if !scaled.is_zero() {
                    out.kernels.push(scaled);
                }
            }
        }
    }
    out
}

fn scale_kernel(k: &StepKernel, factor: f64) -> StepKernel {
    let entries: Vec<_> = k
        .nonzero()
        .map(|(index, value)| crate::malliavin::kernel::KernelEntry { index, value: value * factor })
        .collect();
    // The input is already symmetric, so rebuilding only rescales it.
    StepKernel::new(k.order(), k.cells().to_vec(), &entries).expect("slice of a valid kernel")
}

/// `F(omega + delta_xi) - F(omega)`.
pub fn add_one_cost(f: &ChaosFunctional, r: &PointRealization, x: f64, z: f64) -> Result<f64> {
    if !(x.abs() <= r.window()) {
        return Err(Error::WindowExceeded { what: format!("probe at {x}"), window: r.window() });
    }
    Ok(f.eval(&r.with_point(x, z)?)? - f.eval(r)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_measure::{JumpSet, LevyMeasureModel};
    use crate::malliavin::kernel::Cell;
    use crate::noise_sim::sample_prm;
    use std::sync::Arc;

    fn one() -> JumpSet {
        JumpSet::Atoms(vec![1.0])
    }

    #[test]
    fn first_chaos_derivative_is_the_indicator() {
        let cell = Cell::new(0.0, 1.0, one()).unwrap();
        let f = ChaosFunctional::single(StepKernel::tensor(vec![cell]).unwrap());
        assert_eq!(malliavin_derivative(&f, 0.5, 1.0), ChaosFunctional::constant(1.0));
        assert_eq!(malliavin_derivative(&f, 1.5, 1.0), ChaosFunctional::constant(0.0));
        assert_eq!(malliavin_derivative(&f, 0.5, 2.0), ChaosFunctional::constant(0.0));
    }

    #[test]
    fn second_chaos_derivative_matches_oracle() {
        let m = Arc::new(LevyMeasureModel::unit_atom());
        let f1 = Cell::new(0.0, 1.0, one()).unwrap();
        let f2 = Cell::new(1.0, 2.0, one()).unwrap();
        let f = ChaosFunctional::single(StepKernel::tensor(vec![f1, f2.clone()]).unwrap());
        for s in 0..30 {
            let r = sample_prm(&m, 2.0, s);
            let d = malliavin_derivative(&f, 0.25, 1.0).eval(&r).unwrap();
            assert_eq!(d, f2.compensated(&r).unwrap());
            assert_eq!(d, add_one_cost(&f, &r, 0.25, 1.0).unwrap());
        }
    }

    #[test]
    fn derivative_vanishes_right_of_the_support() {
        let m = Arc::new(LevyMeasureModel::unit_atom());
        let cells = vec![Cell::new(-2.0, -1.0, one()).unwrap(), Cell::new(-1.0, 0.0, one()).unwrap()];
        let f = ChaosFunctional {
            c0: 3.0,
            kernels: vec![StepKernel::tensor(vec![cells[0].clone()]).unwrap(), StepKernel::tensor(cells).unwrap()],
        };
        for s in 0..10 {
            let r = sample_prm(&m, 2.0, s);
            for x in [0.001, 0.5, 1.9] {
                assert_eq!(malliavin_derivative(&f, x, 1.0).eval(&r).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn add_one_cost_of_counts() {
        let m = Arc::new(LevyMeasureModel::unit_atom());
        let f1 = Cell::new(0.0, 1.0, one()).unwrap();
        let f2 = Cell::new(1.0, 2.0, one()).unwrap();
        let single = ChaosFunctional::single(StepKernel::tensor(vec![f1.clone()]).unwrap());
        let r = sample_prm(&m, 2.0, 5);
        assert_eq!(add_one_cost(&single, &r, 0.5, 1.0).unwrap(), 1.0);
        assert_eq!(add_one_cost(&single, &r, 1.5, 1.0).unwrap(), 0.0);
        // N̂(F1) N̂(F2) = I_2(sym(1_{F1} ⊗ 1_{F2})) for disjoint cells.
        let product = ChaosFunctional::single(StepKernel::tensor(vec![f1, f2.clone()]).unwrap());
        assert_eq!(add_one_cost(&product, &r, 0.5, 1.0).unwrap(), f2.compensated(&r).unwrap());
        assert!(matches!(add_one_cost(&single, &r, 3.0, 1.0), Err(Error::WindowExceeded { .. })));
    }
}
