use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ito_integral::process::Coefficient;
use crate::levy_measure::LevyMeasureModel;
use crate::malliavin::chaos::{add_one_cost, malliavin_derivative, ChaosFunctional};
use crate::malliavin::kernel::{eval_multiple_integral, project_kernel, StepKernel};
use crate::mc::McSettings;
use crate::noise_sim::{sample_prm, PointRealization};
use crate::stats::{mean_test, MeanTest};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    /// Test of `E[(I_k(h) - I_k(h^y)) G] = 0`.
    pub orthogonality: MeanTest,
    pub full_second_moment: f64,
    pub projected_second_moment: f64,
    /// Paired test that `E[I_k(h^y)^2] <= E[I_k(h)^2]` within the gate.
    pub contraction_z: f64,
    pub contraction_pass: bool,
}

/// `E[I_k(h) | F_y] = I_k(h^y)`, tested through a bounded `F_y`-measurable
/// probe `G`.
pub fn projection_check(
    model: &Arc<LevyMeasureModel>,
    h: &StepKernel,
    y: f64,
    probe: &Coefficient,
    mc: &McSettings,
) -> Result<ProjectionReport> {
    let horizon = probe.horizon();
    if horizon > y {
        return Err(Error::HorizonViolation { index: 0, horizon, left_end: y });
    }
    let hy = project_kernel(h, y);
    let mut window = h.reach();
    if let Some(reach) = probe.reach() {
        window = window.max(reach.abs()).max(horizon.abs());
    }
    let out = mc.try_run(4, false, |seed, row| {
        let r = sample_prm(model, window, seed);
        let full = eval_multiple_integral(&r, h)?;
        let proj = eval_multiple_integral(&r, &hy)?;
        row[0] = (full - proj) * probe.eval(&r)?;
        row[1] = full * full;
        row[2] = proj * proj;
        row[3] = proj * proj - full * full;
        Ok(())
    })?;
    let diff = out.dim(3);
    let z = if diff.std_error() > 0.0 { diff.mean() / diff.std_error() } else { 0.0 };
    Ok(ProjectionReport {
        orthogonality: mean_test(out.dim(0), 0.0, mc.se_multiplier)?,
        full_second_moment: out.dim(1).mean(),
        projected_second_moment: out.dim(2).mean(),
        contraction_z: z,
        contraction_pass: diff.mean() <= 0.0 || z <= mc.se_multiplier,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosIsometryReport {
    pub order: usize,
    /// `n! ||f~||^2`.
    pub target: f64,
    pub test: MeanTest,
}

/// `E|I_n(f)|^2 = n! ||f~||^2`.
pub fn chaos_isometry_check(
    model: &Arc<LevyMeasureModel>,
    h: &StepKernel,
    mc: &McSettings,
) -> Result<ChaosIsometryReport> {
    let factorial: f64 = (1..=h.order()).map(|i| i as f64).product();
    let target = factorial * h.norm_sq(model)?;
    let window = h.reach();
    let out = mc.try_run(1, false, |seed, row| {
        row[0] = eval_multiple_integral(&sample_prm(model, window, seed), h)?.powi(2);
        Ok(())
    })?;
    Ok(ChaosIsometryReport { order: h.order(), target, test: mean_test(out.dim(0), target, mc.se_multiplier)? })
}

/// `E[I_m(f) I_n(g)] = 0` for `m != n`.
pub fn orthogonality_check(
    model: &Arc<LevyMeasureModel>,
    f: &StepKernel,
    g: &StepKernel,
    mc: &McSettings,
) -> Result<MeanTest> {
    let window = f.reach().max(g.reach());
    let out = mc.try_run(1, false, |seed, row| {
        let r = sample_prm(model, window, seed);
        row[0] = eval_multiple_integral(&r, f)? * eval_multiple_integral(&r, g)?;
        Ok(())
    })?;
    mean_test(out.dim(0), 0.0, mc.se_multiplier)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub probes: u64,
    /// Probes where the two sides differ by more than the tolerance.
    pub mismatches: u64,
    pub max_abs_diff: f64,
}

/// Compares `D_xi F` with `F(omega + delta_xi) - F(omega)` on
/// `realizations` draws and every probe. With `rel_tol = 0` the comparison
/// is bitwise.
pub fn derivative_oracle_check(
    model: &Arc<LevyMeasureModel>,
    f: &ChaosFunctional,
    probes: &[(f64, f64)],
    realizations: u64,
    key: u64,
    rel_tol: f64,
) -> Result<OracleReport> {
    let window = probes.iter().map(|p| p.0.abs()).fold(f.reach(), f64::max);
    let mut report = OracleReport { probes: 0, mismatches: 0, max_abs_diff: 0.0 };
    let derivatives: Vec<ChaosFunctional> = probes.iter().map(|&(x, z)| malliavin_derivative(f, x, z)).collect();
    for i in 0..realizations {
        let r: PointRealization = sample_prm(model, window, crate::rng::SeedToken::new(key, i));
        for (&(x, z), d) in probes.iter().zip(&derivatives) {
            let slice = d.eval(&r)?;
            let oracle = add_one_cost(f, &r, x, z)?;
            let diff = (slice - oracle).abs();
            report.probes += 1;
            report.max_abs_diff = report.max_abs_diff.max(diff);
            if diff > rel_tol * slice.abs().max(oracle.abs()).max(1.0) {
                report.mismatches += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_measure::JumpSet;
    use crate::malliavin::kernel::{Cell, KernelEntry};

    fn one() -> JumpSet {
        JumpSet::Atoms(vec![1.0])
    }

    fn model() -> Arc<LevyMeasureModel> {
        Arc::new(LevyMeasureModel::atoms(&[(1.0, 1.0), (-1.0, 0.5)]).unwrap())
    }

    #[test]
    fn isometry_orders_one_to_three() {
        let m = model();
        let cells: Vec<Cell> = (0..3).map(|i| Cell::new(i as f64 - 1.0, i as f64, one()).unwrap()).collect();
        let mc = McSettings::new(60_000, 31);
        for k in 1..=3 {
            let h = StepKernel::tensor(cells[..k].to_vec()).unwrap();
            let rep = chaos_isometry_check(&m, &h, &mc).unwrap();
            assert!(rep.test.pass, "{rep:?}");
        }
    }

    #[test]
    fn orders_are_orthogonal() {
        let m = model();
        let a = Cell::new(-1.0, 0.0, one()).unwrap();
        let b = Cell::new(0.0, 1.0, one()).unwrap();
        let f = StepKernel::tensor(vec![a.clone()]).unwrap();
        let g = StepKernel::tensor(vec![a, b]).unwrap();
        assert!(orthogonality_check(&m, &f, &g, &McSettings::new(40_000, 8)).unwrap().pass);
    }

    #[test]
    fn projection_is_a_conditional_expectation() {
        let m = model();
        let h = StepKernel::new(
            2,
            vec![Cell::new(-1.0, 0.5, one()).unwrap(), Cell::new(0.5, 1.5, JumpSet::Atoms(vec![1.0, -1.0])).unwrap()],
            &[KernelEntry { index: vec![0, 1], value: 1.5 }],
        )
        .unwrap();
        let probe = Coefficient::clamp_noise(-1.0, 1.0, 2.0).unwrap();
        let rep = projection_check(&m, &h, 1.0, &probe, &McSettings::new(40_000, 4)).unwrap();
        assert!(rep.orthogonality.pass && rep.contraction_pass, "{rep:?}");
        assert!(rep.projected_second_moment <= rep.full_second_moment);
        let future = Coefficient::clamp_noise(0.0, 1.2, 2.0).unwrap();
        assert!(projection_check(&m, &h, 1.0, &future, &McSettings::new(1000, 4)).is_err());
    }

    #[test]
    fn oracle_agrees_exactly_on_dyadic_kernels() {
        let m = model();
        let cells: Vec<Cell> =
            (0..3).map(|i| Cell::new(i as f64 * 0.5, i as f64 * 0.5 + 0.5, one()).unwrap()).collect();
        let f = ChaosFunctional {
            c0: 0.25,
            kernels: vec![
                StepKernel::new(1, cells.clone(), &[KernelEntry { index: vec![1], value: 0.75 }]).unwrap(),
                StepKernel::tensor(cells[..2].to_vec()).unwrap(),
            ],
        };
        let probes = [(0.25, 1.0), (0.75, 1.0), (1.25, 1.0), (0.25, -1.0), (1.9, 1.0)];
        let rep = derivative_oracle_check(&m, &f, &probes, 40, 6, 0.0).unwrap();
        assert_eq!(rep.probes, 200);
        assert_eq!(rep.mismatches, 0, "{rep:?}");
    }
}
